#!/usr/bin/env python3
"""Compare the numba kernels against the pure-numpy fallback.

The backend is fixed at import time, so each one runs in its own
subprocess (``NUDGESIM_DISABLE_JIT=1`` for the fallback). Compile time is
excluded: every case runs once before timing.

    python benchmarks/bench_kernels.py [--repeat 3] [--quick]
"""

import argparse
import json
import os
import subprocess
import sys
import time


def _cases(quick):
    import numpy as np

    from nudgesim import _kernels
    from nudgesim.dynamics import NoiseModel, simulate_open_loop, stream
    from nudgesim.experiments import bias_vector
    from nudgesim.network import NetworkRecipe, generate_modular
    from nudgesim.numerics import solve_discrete_lyapunov
    from nudgesim.policy import Budget, MpcPolicy, mpc_plan
    from nudgesim.qp import HessianFactor, QpProblem, solve_qp

    net = generate_modular(NetworkRecipe())
    u_o = bias_vector("mixed", net.n_agents)
    runs = 20 if quick else 100
    horizon = 500 if quick else 2000

    def sim():
        rngs = [stream(1, i) for i in range(runs)]
        x = simulate_open_loop(net, u_o, NoiseModel(0.025), horizon, rngs)
        return float(x[:, -1].sum())

    def lyap():
        q = solve_discrete_lyapunov(net.social)
        return float(q.sum())

    rng = np.random.default_rng(7)
    n = 60 if quick else 120
    m = rng.normal(size=(n, n))
    prob = QpProblem(m @ m.T + np.eye(n), rng.normal(size=n) * 5, lb=np.zeros(n), ub=np.full(n, 0.3))
    factor = HessianFactor(prob.H)

    def qp_dual():
        c, d = prob.constraint_form()
        z = _kernels.gi_solve(factor.inv_chol, prob.g, c, d, 1e-13, 50000)[0]
        return float(z.sum())

    def qp_pdas():
        return float(solve_qp(prob, factor=factor).z.sum())

    def mpc():
        pol = MpcPolicy(L=20, R=10.0)
        mu = u_o.copy()
        u = u_o.copy()
        b = Budget(10.0)
        total = 0.0
        for _ in range(10):
            controls, _, _ = mpc_plan(pol, net, mu, u, b, 0.025)
            step = controls[0]
            b.charge(step)
            mu = net.social @ mu + (1 - net.lam) * u
            u = u + step
            total += step.sum()
        return float(total)

    return {
        f"open-loop sim ({runs} runs x {horizon} steps)": sim,
        "lyapunov series (N=20)": lyap,
        f"dual active-set QP (n={n})": qp_dual,
        f"primal-dual active-set QP (n={n})": qp_pdas,
        "MPC L=20, 10 receding steps": mpc,
    }


def worker(repeat, quick):
    from nudgesim._accel import backend_name

    out = {"backend": backend_name(), "cases": {}}
    for name, fn in _cases(quick).items():
        value = fn()  # warm-up / compile
        best = float("inf")
        for _ in range(repeat):
            t0 = time.perf_counter()
            fn()
            best = min(best, time.perf_counter() - t0)
        out["cases"][name] = {"seconds": best, "value": value}
    print(json.dumps(out))


def run_backend(disable_jit, repeat, quick):
    env = dict(os.environ)
    if disable_jit:
        env["NUDGESIM_DISABLE_JIT"] = "1"
    else:
        env.pop("NUDGESIM_DISABLE_JIT", None)
    cmd = [sys.executable, __file__, "--worker", "--repeat", str(repeat)] + (["--quick"] if quick else [])
    res = subprocess.run(cmd, env=env, capture_output=True, text=True, check=True)
    return json.loads(res.stdout.strip().splitlines()[-1])


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=3)
    ap.add_argument("--quick", action="store_true", help="smaller problem sizes")
    ap.add_argument("--worker", action="store_true", help=argparse.SUPPRESS)
    args = ap.parse_args()
    if args.worker:
        worker(args.repeat, args.quick)
        return

    jit = run_backend(False, args.repeat, args.quick)
    ref = run_backend(True, args.repeat, args.quick)
    print(f"{'case':<44} {jit['backend']:>10} {ref['backend']:>10} {'speedup':>8}  agree")
    for name, a in jit["cases"].items():
        b = ref["cases"][name]
        agree = abs(a["value"] - b["value"]) <= 1e-8 * max(1.0, abs(b["value"]))
        speed = b["seconds"] / a["seconds"] if a["seconds"] > 0 else float("inf")
        print(f"{name:<44} {a['seconds']:>9.4f}s {b['seconds']:>9.4f}s {speed:>7.1f}x  {'yes' if agree else 'NO'}")


if __name__ == "__main__":
    main()

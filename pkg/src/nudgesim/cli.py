"""Command-line entry point: ``nudgesim {simulate,design,reproduce}``.

Exit codes: 0 success, 1 runtime failure, 2 invalid configuration or usage.
"""

import argparse
import json
import os
import sys
from dataclasses import dataclass, fields, replace
from pathlib import Path

import numpy as np

from . import experiments as ex
from ._accel import backend_name
from .errors import ConfigError
from .network import NetworkRecipe, load_network
from .policy import Budget, MpcPolicy, design_ccp, mpc_plan

EXIT_OK = 0
EXIT_RUNTIME = 1
EXIT_CONFIG = 2

_CLI_KEYS = ("out_dir", "x0", "network_file")


@dataclass(frozen=True)
class Config:
    """A scenario plus the CLI-only keys (output directory, initial state, network file)."""

    scenario: ex.Scenario
    out_dir: str = None
    x0: tuple = None
    network_file: str = None

    def to_dict(self):
        d = self.scenario.to_dict()
        if self.network_file is not None:
            # keep the reference, not the inlined matrix
            d.pop("network", None)
            d["network_file"] = self.network_file
        if self.out_dir is not None:
            d["out_dir"] = self.out_dir
        if self.x0 is not None:
            d["x0"] = list(self.x0)
        return d


def parse_config(doc, base_dir="."):
    """Build a :class:`Config` from a decoded JSON object; raises ConfigError."""
    if not isinstance(doc, dict):
        raise ConfigError("<root>", "config must be a JSON object")
    if "master_seed" not in doc:
        raise ConfigError("master_seed", "a seed is required")
    if not isinstance(doc["master_seed"], int) or isinstance(doc["master_seed"], bool):
        raise ConfigError("master_seed", "must be an integer")
    body = {k: v for k, v in doc.items() if k not in _CLI_KEYS}
    net_file = doc.get("network_file")
    if net_file is not None:
        if "network" in body:
            raise ConfigError("network_file", "give either 'network' or 'network_file', not both")
        path = Path(base_dir) / net_file
        if not path.is_file():
            raise ConfigError("network_file", f"file not found: {path}")
        try:
            body["network"] = load_network(path).to_dict()
        except (ValueError, OSError) as exc:
            raise ConfigError("network_file", str(exc)) from exc
    try:
        sc = ex.Scenario.from_dict(body)
    except ConfigError:
        raise
    except (TypeError, ValueError) as exc:
        raise ConfigError("scenario", str(exc)) from exc
    x0 = doc.get("x0")
    if x0 is not None:
        x0 = tuple(float(v) for v in x0)
    return Config(scenario=sc, out_dir=doc.get("out_dir"), x0=x0, network_file=net_file)


def load_config(path):
    path = Path(path)
    if not path.is_file():
        raise ConfigError("--config", f"file not found: {path}")
    text = path.read_text()
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}:{exc.lineno}:{exc.colno}", exc.msg) from exc
    return parse_config(doc, base_dir=path.parent)


def _validate(cfg):
    net = cfg.scenario.validate()
    if cfg.x0 is not None and len(cfg.x0) != net.n_agents:
        raise ConfigError("x0", f"needs {net.n_agents} entries, got {len(cfg.x0)}")
    return net


def _out_dir(args, cfg=None):
    out = args.out or (cfg.out_dir if cfg is not None else None) or os.environ.get("NUDGESIM_OUT") or "."
    out = Path(out)
    out.mkdir(parents=True, exist_ok=True)
    return out


def _dump(obj, path):
    Path(path).write_text(json.dumps(obj, indent=2) + "\n")


# ------------------------------------------------------------ commands ----


def cmd_simulate(args):
    cfg = load_config(args.config)
    if args.seed is not None:
        cfg = replace(cfg, scenario=replace(cfg.scenario, master_seed=args.seed))
    _validate(cfg)
    out = _out_dir(args, cfg)
    sc = cfg.scenario
    if cfg.x0 is None:
        results = ex.run_many(sc, jobs=args.jobs)
    else:
        results = []
        for i in range(sc.n_runs):
            net = sc.network_for(i)
            r = ex.simulate_closed_loop(
                net, sc.bias_for(net.n_agents), sc.beta, sc.delta, sc.T_sim, sc.policy,
                ex.stream(sc.master_seed, i), model=sc.model, x0=np.asarray(cfg.x0),
            )
            r.run_index = i
            results.append(r)
    ex.write_trajectory_csv(results[0].trajectory, out / "trajectory.csv")
    g, g_se = ex.mean_se([r.gamma_sim for r in results])
    s, s_se = ex.mean_se([r.u_sigma_sim for r in results])
    problems = sorted({p for r in results for p in ex.check_trajectory(r.trajectory, sc.beta, sc.delta)})
    _dump(
        {
            "backend": backend_name(),
            "n_runs": len(results),
            "gamma_sim": g,
            "gamma_se": g_se,
            "u_sigma_sim": s,
            "u_sigma_se": s_se,
            "violations": problems,
            "runs": [r.summary() for r in results],
        },
        out / "metrics.json",
    )
    print(f"wrote {out / 'trajectory.csv'} and {out / 'metrics.json'}")
    print(f"gamma_sim={g:.6g} (se {g_se:.2g})  u_sigma_sim={s:.6g}")
    return EXIT_OK


def cmd_design(args):
    cfg = load_config(args.config)
    net = _validate(cfg)
    sc = cfg.scenario
    out = _out_dir(args, cfg)
    u_o = sc.bias_for(net.n_agents)
    spec = sc.policy
    if args.policy == "ccp":
        if spec.kind not in ("ccp", "none"):
            raise ConfigError("policy.kind", f"design ccp needs a ccp policy block, got {spec.kind!r}")
        pol = design_ccp(net, u_o, sc.beta, spec.T, spec.R, spec.S, sc.delta)
        pol.save(out / "ccp_design.json")
        print(f"wrote {out / 'ccp_design.json'}; T*sum(u_inf) = {pol.horizon_T * pol.solved_u.sum():.6g}")
        return EXIT_OK
    if spec.kind != "mpc":
        raise ConfigError("policy.kind", f"design mpc-dry-run needs an mpc policy block, got {spec.kind!r}")
    mpc = MpcPolicy(
        L=spec.L, R=spec.R, terminal_index=spec.terminal_index,
        budget_constraint=spec.budget_constraint, model=sc.model,
    )
    mu = np.asarray(cfg.x0) if cfg.x0 is not None else u_o.copy()
    controls, mu_pred, sol = mpc_plan(mpc, net, mu, u_o, Budget(sc.beta), sc.delta)
    doc = {
        "policy": "mpc",
        "L": spec.L,
        "first_action": controls[0].tolist(),
        "planned_controls": controls.tolist(),
        "predicted_mu": mu_pred.tolist(),
        "objective": None if sol is None else sol.objective,
        "kkt_residual": None if sol is None else sol.kkt_residual,
    }
    _dump(doc, out / "mpc_plan.json")
    print(f"wrote {out / 'mpc_plan.json'}; first-step spend {controls[0].sum():.6g}")
    return EXIT_OK


def repro_config(doc):
    if doc is None:
        return ex.ReproConfig()
    if not isinstance(doc, dict):
        raise ConfigError("<root>", "config must be a JSON object")
    known = {f.name for f in fields(ex.ReproConfig)}
    unknown = set(doc) - known
    if unknown:
        raise ConfigError("reproduce", f"unknown keys {sorted(unknown)}")
    doc = dict(doc)
    if "recipe" in doc:
        try:
            doc["recipe"] = NetworkRecipe(**doc["recipe"])
        except (TypeError, ValueError) as exc:
            raise ConfigError("recipe", str(exc)) from exc
    try:
        return ex.ReproConfig(**doc)
    except (TypeError, ValueError) as exc:
        raise ConfigError("reproduce", str(exc)) from exc


def cmd_reproduce(args):
    doc = None
    if args.config:
        path = Path(args.config)
        if not path.is_file():
            raise ConfigError("--config", f"file not found: {path}")
        try:
            doc = json.loads(path.read_text())
        except json.JSONDecodeError as exc:
            raise ConfigError(f"{path}:{exc.lineno}:{exc.colno}", exc.msg) from exc
    rc = repro_config(doc)
    if args.seed is not None:
        rc = replace(rc, master_seed=args.seed)
    rc = replace(rc, jobs=args.jobs)
    out = _out_dir(args)
    target = args.target
    if target == "table1":
        tab = ex.reproduce_table1(rc)
        tab.write(out / "table1.csv")
        checks, written = ex.table1_checks(tab), [out / "table1.csv"]
    elif target == "table2":
        tab = ex.reproduce_table2(rc)
        tab.write(out / "table2.csv")
        checks, written = ex.table2_checks(tab), [out / "table2.csv"]
    elif target == "fig3":
        trajs = ex.reproduce_fig3(rc)
        checks, written = ex.fig3_checks(trajs), ex.write_fig3(trajs, out)
    else:
        tabs = ex.reproduce_fig4(rc)
        checks, written = ex.fig4_checks(tabs), ex.write_fig4(tabs, out)
    for p in written:
        print(f"wrote {p}")
    for name, ok in checks:
        print(f"[{'PASS' if ok else 'FAIL'}] {name}")
    n_fail = sum(1 for _, ok in checks if not ok)
    print(f"{len(checks) - n_fail}/{len(checks)} qualitative checks passed")
    return EXIT_OK


# -------------------------------------------------------------- parser ----


def build_parser():
    p = argparse.ArgumentParser(prog="nudgesim", description="Opinion-nudging simulations and policy design.")
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp, config_required):
        sp.add_argument("--config", required=config_required, help="JSON config file")
        sp.add_argument("--out", help="output directory (default: $NUDGESIM_OUT or .)")
        sp.add_argument("--jobs", type=int, default=ex.default_jobs(), help="worker processes")
        sp.add_argument("--seed", type=int, help="override master_seed")

    s = sub.add_parser("simulate", help="run the configured scenario")
    common(s, True)
    s.set_defaults(func=cmd_simulate)

    d = sub.add_parser("design", help="design a policy without simulating")
    d.add_argument("policy", choices=["ccp", "mpc-dry-run"])
    common(d, True)
    d.set_defaults(func=cmd_design)

    r = sub.add_parser("reproduce", help="regenerate a table or figure")
    r.add_argument("target", choices=["table1", "table2", "fig3", "fig4"])
    common(r, False)
    r.set_defaults(func=cmd_reproduce)
    return p


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.jobs is not None and args.jobs < 1:
        parser.error("--jobs must be at least 1")
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except Exception as exc:  # noqa: BLE001 - reported, not swallowed
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())

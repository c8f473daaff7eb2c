"""Scenarios, closed-loop Monte Carlo runs, metrics and the reproduction tables/figures."""

import csv
import io
import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field, replace
from pathlib import Path

import numpy as np

from . import plotting
from .dynamics import NoiseModel, SteadyStateSolver, stream
from .errors import ConfigError, NegativeControl
from .network import NetworkRecipe, generate_modular, network_from_dict
from .policy import (
    Budget,
    BudgetMode,
    ConstantPolicy,
    MpcPolicy,
    PredictionModel,
    TerminalIndex,
    design_ccp,
    feedback_action,
    make_feedback,
    mpc_action,
)

BIAS_PROFILES = ("mixed", "negative", "positive")
_BIAS_LEVELS = {"mixed": (0.2, 0.8), "negative": (0.2, 0.3), "positive": (0.6, 0.8)}


def bias_vector(kind, n_agents):
    """Two-group bias profile: the first half of the agents gets the low level."""
    if kind not in _BIAS_LEVELS:
        raise ValueError(f"unknown bias profile {kind!r}")
    lo, hi = _BIAS_LEVELS[kind]
    out = np.full(n_agents, hi)
    out[: n_agents // 2] = lo
    return out


# ----------------------------------------------------------- policies ----


@dataclass(frozen=True)
class PolicySpec:
    """Serializable description of the intervention applied in a run.

    ``kind`` is one of ``none``, ``constant``, ``feedback``, ``ccp``, ``mpc``;
    only the fields relevant to that kind are used.
    """

    kind: str = "none"
    # constant
    nu: tuple = None
    T: int = 10
    # feedback
    kappa: float = None
    K: tuple = None
    u_c_min: float = 0.0
    u_c_max: float = 1.0
    # ccp / mpc weights
    R: float = 10.0
    S: float = 0.0
    # mpc
    L: int = 5
    terminal_index: str = TerminalIndex.AT_L.value
    budget_constraint: str = BudgetMode.PAPER.value
    use_realized_state: bool = False

    KINDS = ("none", "constant", "feedback", "ccp", "mpc")

    def __post_init__(self):
        if self.kind not in self.KINDS:
            raise ConfigError("policy.kind", f"must be one of {self.KINDS}, got {self.kind!r}")
        TerminalIndex(self.terminal_index)
        BudgetMode(self.budget_constraint)

    def to_dict(self):
        d = {"kind": self.kind}
        keys = {
            "none": (),
            "constant": ("nu", "T"),
            "feedback": ("kappa", "K", "u_c_min", "u_c_max", "use_realized_state"),
            "ccp": ("T", "R", "S"),
            "mpc": ("L", "R", "terminal_index", "budget_constraint", "use_realized_state"),
        }[self.kind]
        for k in keys:
            v = getattr(self, k)
            if isinstance(v, tuple):
                v = [list(r) if isinstance(r, tuple) else r for r in v]
            d[k] = v
        return d

    @classmethod
    def from_dict(cls, d):
        d = dict(d)
        for k in ("nu", "K"):
            if d.get(k) is not None:
                v = d[k]
                d[k] = tuple(tuple(r) if isinstance(r, list) else r for r in v) if isinstance(v, list) else v
        unknown = set(d) - {f for f in cls.__dataclass_fields__}
        if unknown:
            raise ConfigError("policy", f"unknown keys {sorted(unknown)}")
        return cls(**d)


class _Controller:
    """Stateful per-run wrapper turning a :class:`PolicySpec` into actions."""

    def __init__(self, spec, net, u_o, delta, beta, model):
        self.spec = spec
        self.net = net
        self.delta = delta
        self.model = model
        n = net.n_agents
        kind = spec.kind
        if kind == "constant":
            nu = np.full(n, 0.01) if spec.nu is None else np.broadcast_to(np.asarray(spec.nu, float), (n,))
            self.policy = ConstantPolicy(nu, spec.T)
        elif kind == "feedback":
            K = spec.K if spec.K is not None else spec.kappa
            self.policy = make_feedback(net, None if K is None else np.asarray(K, float), spec.u_c_min, spec.u_c_max)
        elif kind == "ccp":
            self.policy = design_ccp(net, u_o, beta, spec.T, spec.R, spec.S, delta)
        elif kind == "mpc":
            self.policy = MpcPolicy(
                L=spec.L,
                R=spec.R,
                terminal_index=spec.terminal_index,
                budget_constraint=spec.budget_constraint,
                model=model,
            )
        else:
            self.policy = None

    def __call__(self, t, x, mu, u, budget):
        n = self.net.n_agents
        kind = self.spec.kind
        if kind == "none":
            return np.zeros(n)
        if kind == "constant" or kind == "ccp":
            return self.policy.action(t, u, budget, self.delta)
        est = x if self.spec.use_realized_state else mu
        if kind == "feedback":
            return feedback_action(self.policy, np.clip(est, 0.0, 1.0), budget, u, self.delta)
        return mpc_action(self.policy, self.net, est, u, budget, self.delta)


# ----------------------------------------------------------- scenario ----


@dataclass(frozen=True)
class Scenario:
    recipe: NetworkRecipe = field(default_factory=NetworkRecipe)
    bias: str = "mixed"
    custom_bias: tuple = None
    beta: float = 10.0
    delta: float = 0.025
    T_sim: int = 30
    policy: PolicySpec = field(default_factory=PolicySpec)
    n_runs: int = 20
    master_seed: int = 0
    model: str = PredictionModel.LONG.value
    regenerate_network: bool = False
    network: dict = None

    def __post_init__(self):
        if self.T_sim < 1:
            raise ConfigError("T_sim", "must be at least 1")
        if self.n_runs < 1:
            raise ConfigError("n_runs", "must be at least 1")
        if self.beta < 0:
            raise ConfigError("beta", "must be nonnegative")
        if self.custom_bias is None and self.bias not in BIAS_PROFILES:
            raise ConfigError("bias", f"must be one of {BIAS_PROFILES} or custom, got {self.bias!r}")
        PredictionModel(self.model)

    @property
    def lambda_value(self):
        return self.recipe.lambda_value

    def network_for(self, run_index=0):
        if self.network is not None:
            return network_from_dict(self.network)
        recipe = self.recipe
        if self.regenerate_network:
            recipe = replace(recipe, seed=recipe.seed + run_index)
        return generate_modular(recipe)

    def bias_for(self, n):
        if self.custom_bias is not None:
            u_o = np.asarray(self.custom_bias, dtype=np.float64)
            if u_o.shape != (n,):
                raise ConfigError("custom_bias", f"needs {n} entries, got {u_o.shape}")
        else:
            u_o = bias_vector(self.bias, n)
        return u_o

    def validate(self):
        """Check the scenario can run; raises ConfigError naming the field."""
        try:
            net = self.network_for(0)
        except Exception as exc:  # surfaced as a config problem
            raise ConfigError("network", str(exc)) from exc
        u_o = self.bias_for(net.n_agents)
        try:
            NoiseModel(self.delta).check_bias(u_o)
        except ValueError as exc:
            raise ConfigError("delta", str(exc)) from exc
        if np.any(u_o > 1.0 - self.delta):
            raise ConfigError("bias", "biases must not exceed 1 - delta")
        return net

    def to_dict(self):
        d = asdict(self)
        d["policy"] = self.policy.to_dict()
        d["recipe"] = asdict(self.recipe)
        if self.custom_bias is not None:
            d["custom_bias"] = list(self.custom_bias)
        return d

    @classmethod
    def from_dict(cls, d):
        d = dict(d)
        unknown = set(d) - set(cls.__dataclass_fields__)
        if unknown:
            raise ConfigError("scenario", f"unknown keys {sorted(unknown)}")
        if "recipe" in d:
            try:
                d["recipe"] = NetworkRecipe(**d["recipe"])
            except (TypeError, ValueError) as exc:
                raise ConfigError("recipe", str(exc)) from exc
        if "policy" in d:
            d["policy"] = PolicySpec.from_dict(d["policy"])
        if d.get("custom_bias") is not None:
            d["custom_bias"] = tuple(d["custom_bias"])
        return cls(**d)


# ------------------------------------------------------------ metrics ----


def social_benefit(x_final):
    """Squared distance of the inclinations from full adoption (lower is better)."""
    x_final = np.asarray(x_final, dtype=np.float64)
    return float(np.sum((1.0 - x_final) ** 2))


@dataclass
class TrajectoryRecord:
    x: np.ndarray  # (T_sim+1, N)
    u: np.ndarray  # input entering the clamp at each step
    u_c: np.ndarray
    spend_to_date: np.ndarray
    gamma: np.ndarray

    @property
    def n_steps(self):
        return self.x.shape[0]

    def rows(self):
        n = self.x.shape[1]
        header = (
            ["t"]
            + [f"x_{v}" for v in range(n)]
            + [f"u_{v}" for v in range(n)]
            + [f"uc_{v}" for v in range(n)]
            + ["spend_to_date", "gamma", "u_sigma"]
        )
        yield header
        for t in range(self.n_steps):
            yield (
                [t]
                + self.x[t].tolist()
                + self.u[t].tolist()
                + self.u_c[t].tolist()
                + [self.spend_to_date[t], self.gamma[t], self.spend_to_date[t]]
            )


@dataclass
class RunMetrics:
    gamma_sim: float
    u_sigma_sim: float
    budget_pct: float
    trajectory: TrajectoryRecord
    run_index: int = 0

    def summary(self):
        return {
            "run_index": self.run_index,
            "gamma_sim": self.gamma_sim,
            "u_sigma_sim": self.u_sigma_sim,
            "budget_pct": self.budget_pct,
        }


def check_trajectory(traj, beta, delta, eps=1e-9):
    """Re-verify boundedness, envelope and budget safety; returns a list of problems."""
    problems = []
    if np.any(traj.x < -eps) or np.any(traj.x > 1 + eps):
        problems.append("x left [0, 1]")
    if np.any(traj.u < delta - eps) or np.any(traj.u > 1 - delta + eps):
        problems.append("u left [delta, 1 - delta]")
    if np.any(traj.u_c < 0):
        problems.append("negative control")
    if traj.spend_to_date[-1] > beta + eps:
        problems.append("budget exceeded")
    if np.any(np.diff(traj.spend_to_date) < 0):
        problems.append("spend decreased")
    return problems


def simulate_closed_loop(net, u_o, beta, delta, T_sim, policy, rng, model="long", x0=None):
    """Run one closed loop and return its :class:`RunMetrics`.

    The controller sees the realized state, the noise-free expected state and
    the reservoir at every step. For the short-term model the controls do
    not accumulate: the input entering step ``t`` is ``u_o + u_c(t)``.
    """
    model = PredictionModel(model)
    n = net.n_agents
    u_o = np.asarray(u_o, dtype=np.float64)
    noise = NoiseModel(delta)
    if isinstance(policy, PolicySpec):
        ctrl = _Controller(policy, net, u_o, delta, beta, model)
    else:
        ctrl = policy
    A = net.social
    one_minus = 1.0 - net.lam
    x = u_o.copy() if x0 is None else np.asarray(x0, dtype=np.float64).copy()
    mu = x.copy()
    u = u_o.copy()
    budget = Budget(beta)

    xs = np.empty((T_sim + 1, n))
    us = np.empty((T_sim + 1, n))
    ucs = np.zeros((T_sim + 1, n))
    spend = np.zeros(T_sim + 1)
    for t in range(T_sim):
        u_c = np.asarray(ctrl(t, x, mu, u, budget), dtype=np.float64)
        if np.any(u_c < 0):
            raise NegativeControl(f"policy produced a negative control at t={t}")
        budget.charge(u_c)
        u_nc = noise.draw(rng, n)
        xs[t] = x
        ucs[t] = u_c
        spend[t] = budget.spent
        if model is PredictionModel.LONG:
            us[t] = u
            x = A @ x + one_minus * np.clip(u + u_nc, 0.0, 1.0)
            mu = A @ mu + one_minus * u
            u = u + u_c
        else:
            drive = u_o + u_c
            us[t] = drive
            x = A @ x + one_minus * np.clip(drive + u_nc, 0.0, 1.0)
            mu = A @ mu + one_minus * drive
    xs[T_sim] = x
    us[T_sim] = u if model is PredictionModel.LONG else u_o
    spend[T_sim] = budget.spent
    gamma = np.sum((1.0 - xs) ** 2, axis=1)
    traj = TrajectoryRecord(x=xs, u=us, u_c=ucs, spend_to_date=spend, gamma=gamma)
    u_sigma = float(budget.spent)
    pct = 100.0 * u_sigma / beta if beta > 0 else 0.0
    return RunMetrics(gamma_sim=float(gamma[-1]), u_sigma_sim=u_sigma, budget_pct=pct, trajectory=traj)


def run_closed_loop(sc, run_index):
    """One Monte Carlo run of a scenario; deterministic in ``(master_seed, run_index)``."""
    net = sc.network_for(run_index)
    u_o = sc.bias_for(net.n_agents)
    NoiseModel(sc.delta).check_bias(u_o)
    res = simulate_closed_loop(
        net, u_o, sc.beta, sc.delta, sc.T_sim, sc.policy, stream(sc.master_seed, run_index), model=sc.model
    )
    res.run_index = run_index
    return res


def _run_one(args):
    sc, idx = args
    return run_closed_loop(sc, idx)


def default_jobs():
    try:
        return len(os.sched_getaffinity(0))
    except AttributeError:  # pragma: no cover
        return os.cpu_count() or 1


def run_many(sc, jobs=1, indices=None):
    """All runs of a scenario, merged in run-index order regardless of ``jobs``."""
    indices = range(sc.n_runs) if indices is None else indices
    tasks = [(sc, i) for i in indices]
    if jobs is None or jobs <= 1 or len(tasks) <= 1:
        return [_run_one(t) for t in tasks]
    with ProcessPoolExecutor(max_workers=jobs) as pool:
        return list(pool.map(_run_one, tasks))


def mean_se(values):
    v = np.asarray(values, dtype=np.float64)
    if v.size < 2:
        return float(v.mean()), 0.0
    return float(v.mean()), float(v.std(ddof=1) / math.sqrt(v.size))


# -------------------------------------------------------- reproduction ----


@dataclass
class ReproConfig:
    """Knobs shared by the reproduction targets.

    The MPC arms use the plain total-budget row by default: with the stricter
    per-step row the controller only halves the remainder each step and never
    lands exactly on the budget.
    """

    n_runs: int = 20
    master_seed: int = 2024
    network_seed: int = 0
    T_sim: int = 30
    delta: float = 0.025
    jobs: int = 1
    recipe: NetworkRecipe = field(default_factory=NetworkRecipe)
    budget_constraint: str = BudgetMode.TOTAL.value
    terminal_index: str = TerminalIndex.AT_L.value
    table2_L: int = 5
    fig4_L: int = 5

    def scenario(self, bias, lam, beta, policy, model="long"):
        recipe = replace(self.recipe, lambda_value=lam, seed=self.network_seed)
        return Scenario(
            recipe=recipe,
            bias=bias,
            beta=beta,
            delta=self.delta,
            T_sim=self.T_sim,
            policy=policy,
            n_runs=self.n_runs,
            master_seed=self.master_seed,
            model=model,
            regenerate_network=True,
        )

    def mpc(self, L, R):
        return PolicySpec(
            kind="mpc", L=L, R=R, terminal_index=self.terminal_index, budget_constraint=self.budget_constraint
        )


@dataclass
class Table:
    header: list
    rows: list

    def to_csv(self):
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(self.header)
        for r in self.rows:
            w.writerow([_fmt(v) for v in r])
        return buf.getvalue()

    def write(self, path):
        Path(path).write_text(self.to_csv(), newline="")

    def column(self, name):
        i = self.header.index(name)
        return [r[i] for r in self.rows]

    def select(self, **where):
        idx = {k: self.header.index(k) for k in where}
        return [r for r in self.rows if all(r[idx[k]] == v for k, v in where.items())]

    def get(self, row, name):
        return row[self.header.index(name)]


def _fmt(v):
    if isinstance(v, float):
        return repr(v)
    return v


def _cell_stats(results, beta, delta):
    g, g_se = mean_se([r.gamma_sim for r in results])
    s, s_se = mean_se([r.u_sigma_sim for r in results])
    b, b_se = mean_se([r.budget_pct for r in results])
    problems = sorted({p for r in results for p in check_trajectory(r.trajectory, beta, delta)})
    return g, g_se, s, s_se, b, b_se, problems


TABLE1_LAMBDAS = (0.25, 0.75)
TABLE1_HORIZONS = (5, 20)


def reproduce_table1(cfg=None, beta=10.0, R=10.0, lambdas=TABLE1_LAMBDAS, horizons=TABLE1_HORIZONS, biases=BIAS_PROFILES):
    """Short-term vs long-term model under MPC; one row per (bias, lambda, L, model)."""
    cfg = cfg or ReproConfig()
    header = ["bias", "lambda", "L", "model", "gamma_sim", "gamma_se", "u_sigma_sim", "u_sigma_se", "n_runs", "violations"]
    rows = []
    for bias in biases:
        for lam in lambdas:
            for L in horizons:
                for model in ("short", "long"):
                    sc = cfg.scenario(bias, lam, beta, cfg.mpc(L, R), model=model)
                    g, g_se, s, s_se, _, _, probs = _cell_stats(run_many(sc, jobs=cfg.jobs), sc.beta, sc.delta)
                    rows.append([bias, lam, L, model, g, g_se, s, s_se, cfg.n_runs, ";".join(probs)])
    return Table(header, rows)


TABLE2_BUDGETS = (("high", 25.0), ("mod", 8.0), ("low", 5.0))


def reproduce_table2(cfg=None, R=10.0, budgets=TABLE2_BUDGETS, lambdas=TABLE1_LAMBDAS, biases=BIAS_PROFILES):
    """Long-term model under MPC across budget levels; one row per (bias, budget, lambda)."""
    cfg = cfg or ReproConfig()
    header = ["bias", "budget", "beta", "lambda", "gamma_sim", "gamma_se", "budget_pct", "budget_pct_se", "n_runs", "violations"]
    rows = []
    for bias in biases:
        for label, beta in budgets:
            for lam in lambdas:
                sc = cfg.scenario(bias, lam, beta, cfg.mpc(cfg.table2_L, R))
                g, g_se, _, _, b, b_se, probs = _cell_stats(run_many(sc, jobs=cfg.jobs), sc.beta, sc.delta)
                rows.append([bias, label, beta, lam, g, g_se, b, b_se, cfg.n_runs, ";".join(probs)])
    return Table(header, rows)


def reproduce_fig3(cfg=None, R=10.0, lam=0.25, budgets=TABLE2_BUDGETS):
    """Per-agent inclination trajectories, negative bias, one realization per budget.

    Returns ``{label: TrajectoryRecord}`` including an ``open_loop`` entry.
    """
    cfg = cfg or ReproConfig()
    out = {}
    for label, beta in budgets:
        sc = replace(cfg.scenario("negative", lam, beta, cfg.mpc(cfg.table2_L, R)), n_runs=1)
        out[label] = run_closed_loop(sc, 0).trajectory
    sc = replace(cfg.scenario("negative", lam, 0.0, PolicySpec()), n_runs=1)
    out["open_loop"] = run_closed_loop(sc, 0).trajectory
    return out


def reproduce_fig4(cfg=None, beta=10.0, R=15.0, T=20, S=10.0, lam=0.25):
    """Mean Gamma(t) and cumulative spend for MPC vs CCP, mixed bias.

    Returns ``{"mpc": Table, "ccp": Table}`` with columns
    ``t, gamma, gamma_se, u_sigma, u_sigma_se``.
    """
    cfg = cfg or ReproConfig()
    out = {}
    specs = {
        "mpc": cfg.mpc(cfg.fig4_L, R),
        "ccp": PolicySpec(kind="ccp", T=T, R=R, S=S),
    }
    for name, spec in specs.items():
        sc = cfg.scenario("mixed", lam, beta, spec)
        res = run_many(sc, jobs=cfg.jobs)
        gam = np.stack([r.trajectory.gamma for r in res])
        spend = np.stack([r.trajectory.spend_to_date for r in res])
        rows = []
        for t in range(gam.shape[1]):
            g, g_se = mean_se(gam[:, t])
            s, s_se = mean_se(spend[:, t])
            rows.append([t, g, g_se, s, s_se])
        out[name] = Table(["t", "gamma", "gamma_se", "u_sigma", "u_sigma_se"], rows)
        out[name].problems = sorted({p for r in res for p in check_trajectory(r.trajectory, beta, cfg.delta)})
    return out


# ----------------------------------------------------- qualitative checks ----


def table1_checks(tab):
    out = []
    cells = {}
    for r in tab.rows:
        bias, lam, L, model = r[:4]
        cells.setdefault((bias, lam, L), {})[model] = r
    ok = all(tab.get(c["long"], "gamma_sim") < tab.get(c["short"], "gamma_sim") for c in cells.values())
    out.append(("long-term gamma below short-term in every cell", ok))
    ok = all(
        tab.get(c["long"], "gamma_sim") < 0.5 for (bias, _, _), c in cells.items() if bias in ("mixed", "positive")
    )
    out.append(("long-term gamma < 0.5 for mixed/positive bias", ok))
    ok = all(r[6] <= 10.0 + 1e-9 for r in tab.rows)
    out.append(("spend within budget", ok))
    out.append(("safety invariants", all(not r[-1] for r in tab.rows)))
    return out


def table2_checks(tab):
    out = []
    low = tab.select(budget="low")
    out.append(("B% = 100 at low budget", all(abs(tab.get(r, "budget_pct") - 100.0) <= 1e-6 for r in low)))
    high = tab.select(budget="high")
    out.append(("B% < 100 at high budget", all(tab.get(r, "budget_pct") < 100.0 for r in high)))
    mono = True
    for bias in {r[0] for r in tab.rows}:
        for lam in {r[3] for r in tab.rows}:
            cell = sorted(tab.select(bias=bias, **{"lambda": lam}), key=lambda r: tab.get(r, "beta"))
            gam = [tab.get(r, "gamma_sim") for r in cell]
            mono &= all(a >= b for a, b in zip(gam, gam[1:]))
    out.append(("gamma nonincreasing in budget", mono))
    neg = {tab.get(r, "lambda"): tab.get(r, "gamma_sim") for r in tab.select(bias="negative", budget="low")}
    if 0.25 in neg and 0.75 in neg:
        out.append(("lambda=0.75 better at low budget, negative bias", neg[0.75] < neg[0.25]))
    out.append(("safety invariants", all(not r[-1] for r in tab.rows)))
    return out


def fig3_checks(trajs):
    high = trajs["high"]
    return [("all inclinations > 0.9 at high budget", bool(np.all(high.x[-1] > 0.9)))]


def fig4_checks(tabs, early=10):
    mpc, ccp = tabs["mpc"], tabs["ccp"]
    s_m = np.array(mpc.column("u_sigma"))
    s_c = np.array(ccp.column("u_sigma"))
    g_m = mpc.column("gamma")[-1]
    g_c = ccp.column("gamma")[-1]
    out = [
        ("MPC spends at least as much as CCP early on", bool(np.all(s_m[: early + 1] >= s_c[: early + 1] - 1e-12))),
        ("final gamma MPC <= CCP + 0.05", g_m <= g_c + 0.05),
        ("final spends within 2%", abs(s_m[-1] - s_c[-1]) <= 0.02 * max(s_m[-1], s_c[-1])),
        ("safety invariants", not mpc.problems and not ccp.problems),
    ]
    return out


# ------------------------------------------------------------- output ----


def write_trajectory_csv(traj, path):
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    for row in traj.rows():
        w.writerow([_fmt(v) if isinstance(v, float) else v for v in row])
    Path(path).write_text(buf.getvalue(), newline="")


def write_fig3(trajs, out_dir):
    out_dir = Path(out_dir)
    paths = []
    for label, traj in trajs.items():
        p = out_dir / f"fig3_{label}.csv"
        write_trajectory_csv(traj, p)
        paths.append(p)
        series = {f"x_{v}": traj.x[:, v] for v in range(traj.x.shape[1])}
        svg = plotting.line_chart(
            series, title=f"x(t), budget {label}", xlabel="t (steps)", legend=False
        )
        p = out_dir / f"fig3_{label}.svg"
        p.write_text(svg)
        paths.append(p)
    return paths


def write_fig4(tabs, out_dir):
    out_dir = Path(out_dir)
    paths = []
    for name, tab in tabs.items():
        p = out_dir / f"fig4_{name}.csv"
        tab.write(p)
        paths.append(p)
    series = {
        "Γ^MPC_sim": tabs["mpc"].column("gamma"),
        "Γ^CCP_sim": tabs["ccp"].column("gamma"),
        "u^Σ,MPC_sim": tabs["mpc"].column("u_sigma"),
        "u^Σ,CCP_sim": tabs["ccp"].column("u_sigma"),
    }
    p = out_dir / "fig4.svg"
    p.write_text(plotting.line_chart(series, title="Social benefit vs cumulative cost", xlabel="t (steps)"))
    paths.append(p)
    return paths


def steady_state_for(sc, run_index=0):
    net = sc.network_for(run_index)
    return SteadyStateSolver(net)(sc.bias_for(net.n_agents))

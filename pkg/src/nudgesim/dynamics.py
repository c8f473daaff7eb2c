"""Opinion dynamics: the saturated-integrator (long-term shift) model, its
expected-value recursion, the non-accumulating short-term baseline, and the
closed-form steady state.
"""

from dataclasses import dataclass, field

import numpy as np

from . import _kernels
from .errors import DimensionMismatch, NegativeControl
from .numerics import LUFactor, as_vector


def stream(master_seed, run_index):
    """Independent generator for one Monte Carlo run.

    Derived from ``(master_seed, run_index)`` only, so runs can be executed
    in any order or in parallel.
    """
    return np.random.default_rng(np.random.SeedSequence([int(master_seed), int(run_index)]))


@dataclass(frozen=True)
class NoiseModel:
    """Uniform white noise on ``[-delta, delta]``, independent per agent and step."""

    delta: float = 0.025

    def __post_init__(self):
        if self.delta < 0:
            raise ValueError("delta must be nonnegative")

    def draw(self, rng, n):
        if self.delta == 0:
            return np.zeros(n)
        return rng.uniform(-self.delta, self.delta, size=n)

    def check_bias(self, u_o):
        """Raise unless ``0 < delta < min(u_o)`` (Assumption 2)."""
        u_o = np.asarray(u_o, dtype=np.float64)
        if not 0 < self.delta < u_o.min():
            raise ValueError(
                f"Assumption 2 violated: need 0 < delta < min(u_o); "
                f"delta={self.delta}, min(u_o)={u_o.min()}"
            )


NO_NOISE = NoiseModel(0.0)


@dataclass
class SimulationState:
    x: np.ndarray
    u: np.ndarray
    t: int = 0
    rng: np.random.Generator = field(default=None, repr=False)

    @classmethod
    def initial(cls, u_o, x0=None, rng=None):
        u_o = np.array(u_o, dtype=np.float64)
        x0 = u_o.copy() if x0 is None else np.array(x0, dtype=np.float64)
        return cls(x=x0, u=u_o, t=0, rng=rng if rng is not None else np.random.default_rng(0))


def _check(net, *vecs):
    n = net.n_agents
    for name, v in vecs:
        if np.shape(v) != (n,):
            raise DimensionMismatch(f"{name} must have shape ({n},), got {np.shape(v)}")


def step_long_term(net, s, u_c, noise):
    """One step of the long-term shift model; returns a new state.

    ``x+ = Lambda P x + (I - Lambda) clip(u + u_nc, 0, 1)`` and ``u+ = u + u_c``.
    The noise is drawn from ``s.rng``, which advances in place.
    """
    u_c = np.asarray(u_c, dtype=np.float64)
    _check(net, ("x", s.x), ("u", s.u), ("u_c", u_c))
    if np.any(u_c < 0):
        raise NegativeControl(f"controls must be nonnegative, min was {u_c.min():.3g}")
    u_nc = noise.draw(s.rng, net.n_agents)
    drive = np.clip(s.u + u_nc, 0.0, 1.0)
    x = net.social @ s.x + (1.0 - net.lam) * drive
    return SimulationState(x=x, u=s.u + u_c, t=s.t + 1, rng=s.rng)


def step_short_term(net, mu_st, u_o, u_c):
    """Baseline model in which interventions act for one step only."""
    _check(net, ("mu_st", mu_st), ("u_o", u_o), ("u_c", u_c))
    if np.any(np.asarray(u_c) < 0):
        raise NegativeControl("controls must be nonnegative")
    return net.social @ mu_st + (1.0 - net.lam) * (np.asarray(u_o) + np.asarray(u_c))


def step_short_term_noisy(net, x, u_o, u_c, u_nc):
    """Stochastic counterpart of :func:`step_short_term` used in closed-loop runs."""
    drive = np.clip(np.asarray(u_o) + u_c + u_nc, 0.0, 1.0)
    return net.social @ x + (1.0 - net.lam) * drive


def expected_step(net, mu, u_expect):
    """Noise-free prediction ``Lambda P mu + (I - Lambda) u``."""
    _check(net, ("mu", mu), ("u_expect", u_expect))
    return net.social @ mu + (1.0 - net.lam) * np.asarray(u_expect)


class SteadyStateSolver:
    """Caches the LU factor of ``I - Lambda P`` for repeated steady-state queries."""

    def __init__(self, net):
        self.net = net
        self._lu = LUFactor(np.eye(net.n_agents) - net.social)

    def __call__(self, u_bar):
        u_bar = as_vector(u_bar, self.net.n_agents, "u_bar")
        return self._lu.solve((1.0 - self.net.lam) * u_bar)

    def gain(self):
        """The matrix ``(I - Lambda P)^{-1} (I - Lambda)``."""
        return self._lu.solve_matrix(np.diag(1.0 - self.net.lam))


def steady_state(net, u_bar):
    """Asymptotic expected inclination ``(I - Lambda P)^{-1} (I - Lambda) u_bar``."""
    return SteadyStateSolver(net)(u_bar)


def simulate_open_loop(net, u_o, noise, horizon, rngs, uc_schedule=None, x0=None):
    """Final states x(horizon) for a batch of runs under a fixed input schedule.

    ``rngs`` supplies one generator per run. The noise for each run is drawn
    up front as a (horizon, N) block, which consumes the generator exactly
    like ``horizon`` successive per-step draws.
    """
    n = net.n_agents
    u_o = as_vector(u_o, n, "u_o")
    x0 = u_o if x0 is None else as_vector(x0, n, "x0")
    if uc_schedule is None:
        uc_schedule = np.zeros((horizon, n))
    uc_schedule = np.ascontiguousarray(uc_schedule, dtype=np.float64)
    if np.any(uc_schedule < 0):
        raise NegativeControl("controls must be nonnegative")
    if noise.delta == 0:
        draws = np.zeros((len(rngs), horizon, n))
    else:
        draws = np.stack([r.uniform(-noise.delta, noise.delta, size=(horizon, n)) for r in rngs])
    return _kernels.simulate_long_term_batch(
        np.ascontiguousarray(net.social), np.ascontiguousarray(1.0 - net.lam), x0, u_o.copy(), uc_schedule, draws
    )


def simulate_open_loop_numpy(net, u_o, noise, horizon, rngs, uc_schedule=None, x0=None):
    """Vectorized-over-runs reference for :func:`simulate_open_loop`."""
    n = net.n_agents
    u_o = as_vector(u_o, n, "u_o")
    x = np.tile(u_o if x0 is None else as_vector(x0, n, "x0"), (len(rngs), 1))
    u = np.tile(u_o, (len(rngs), 1))
    if uc_schedule is None:
        uc_schedule = np.zeros((horizon, n))
    if noise.delta == 0:
        draws = np.zeros((len(rngs), horizon, n))
    else:
        draws = np.stack([r.uniform(-noise.delta, noise.delta, size=(horizon, n)) for r in rngs])
    social_t = net.social.T
    one_minus = 1.0 - net.lam
    for t in range(horizon):
        x = x @ social_t + one_minus * np.clip(u + draws[:, t], 0.0, 1.0)
        u = u + uc_schedule[t]
    return x

"""Budget accounting and the four nudging strategies.

Every strategy returns a nonnegative control that respects the remaining
budget and keeps the reservoir inside ``[delta, 1 - delta]``; the simulator
trusts these guarantees and only rejects negative controls.
"""

import json
from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path

import numpy as np

from .dynamics import SteadyStateSolver
from .errors import DimensionMismatch, NoConvergence
from .numerics import TOL, as_vector, solve_discrete_lyapunov, spectral_radius
from .qp import HessianFactor, QpProblem, QpStatus, solve_qp

# ------------------------------------------------------------ budget ----


@dataclass
class Budget:
    beta: float
    spent: float = 0.0

    def __post_init__(self):
        if self.beta < 0:
            raise ValueError("beta must be nonnegative")

    def remaining(self):
        return max(0.0, self.beta - self.spent)

    def charge(self, u_c):
        amount = float(np.sum(u_c))
        if amount < 0:
            raise ValueError("cannot charge a negative amount")
        self.spent += amount
        return amount


def budget_remaining(b):
    return b.remaining()


def enforce_limits(u_c, u_now, remaining, delta):
    """Clip a requested control to the feasible set.

    Negative entries are zeroed, each component is capped so that
    ``u_now + u_c <= 1 - delta``, and the whole vector is scaled down
    uniformly if its sum exceeds ``remaining``.
    """
    u_c = np.maximum(np.asarray(u_c, dtype=np.float64), 0.0)
    if u_now is not None:
        cap = np.maximum((1.0 - delta) - np.asarray(u_now), 0.0)
        u_c = np.minimum(u_c, cap)
    total = u_c.sum()
    if total > remaining:
        u_c = u_c * (remaining / total) if total > 0 else u_c
        # rounding in the scale factor must not push the sum over
        while u_c.sum() > remaining and remaining > 0:
            u_c = u_c * (1.0 - 1e-15)
        if remaining <= 0:
            u_c = np.zeros_like(u_c)
    return u_c


# ---------------------------------------------------------- constant ----


@dataclass(frozen=True)
class ConstantPolicy:
    """Fixed per-agent nudge ``nu`` held for ``horizon_T`` steps.

    With ``flush`` the step right after the horizon spends whatever budget is
    left in one proportional burst (``nu * U / sum(nu)``), so the final
    reservoir is ``u_o + T nu + nu_r``.
    """

    nu: np.ndarray
    horizon_T: int
    flush: bool = True

    def __post_init__(self):
        nu = np.asarray(self.nu, dtype=np.float64).reshape(-1)
        if np.any(nu < 0):
            raise ValueError("nu must be nonnegative")
        if self.horizon_T < 1:
            raise ValueError("horizon_T must be at least 1")
        object.__setattr__(self, "nu", nu)

    def action(self, t, u_now, b, delta):
        if t < self.horizon_T:
            return constant_action(self, u_now, b, delta)
        if t == self.horizon_T and self.flush:
            return _scaled_nu(self.nu, b.remaining(), u_now, delta)
        return np.zeros_like(self.nu)


def _scaled_nu(nu, remaining, u_now, delta):
    total = nu.sum()
    if remaining <= 0 or total <= 0:
        return np.zeros_like(nu)
    return enforce_limits(nu * (remaining / total), u_now, remaining, delta)


def constant_action(p, u_now, b, delta):
    """Control of the constant policy at a step inside its horizon.

    Returns ``nu`` when the budget covers it, the proportional remainder
    ``nu * U / sum(nu)`` when it does not, and zero once the budget is gone.
    Components that would push the reservoir past ``1 - delta`` are truncated.
    """
    nu = p.nu
    u_now = as_vector(u_now, nu.shape[0], "u_now")
    remaining = b.remaining()
    if remaining <= 0 or nu.sum() <= 0:
        return np.zeros_like(nu)
    if remaining >= nu.sum():
        return enforce_limits(nu, u_now, remaining, delta)
    return _scaled_nu(nu, remaining, u_now, delta)


# ---------------------------------------------------------- feedback ----


def closed_loop_matrix(net, K):
    return net.social - (1.0 - net.lam)[:, None] * K


@dataclass(frozen=True)
class FeedbackPolicy:
    """Saturated proportional feedback on the adoption gap, ``K (1 - mu)``."""

    K: np.ndarray
    u_c_min: np.ndarray
    u_c_max: np.ndarray

    @property
    def n(self):
        return self.K.shape[0]


def make_feedback(net, K=None, u_c_min=0.0, u_c_max=1.0):
    """Build a :class:`FeedbackPolicy`, rejecting gains that destabilize the mean dynamics.

    ``K=None`` picks ``kappa * I`` with the largest ``kappa`` in
    ``1, 1/2, 1/4, ...`` that passes the spectral-radius test.
    """
    n = net.n_agents
    if K is None:
        K = default_gain(net)
    K = np.array(K, dtype=np.float64)
    if K.ndim == 0:
        K = float(K) * np.eye(n)
    if K.shape != (n, n):
        raise DimensionMismatch(f"K must be {n}x{n}, got {K.shape}")
    rho = spectral_radius(closed_loop_matrix(net, K))
    if rho >= 1.0:
        raise ValueError(f"feedback gain rejected: closed-loop spectral radius {rho:.4g} >= 1")
    lo = np.broadcast_to(np.asarray(u_c_min, dtype=np.float64), (n,)).copy()
    hi = np.broadcast_to(np.asarray(u_c_max, dtype=np.float64), (n,)).copy()
    if np.any(lo < 0) or np.any(lo > hi):
        raise ValueError("need 0 <= u_c_min <= u_c_max")
    return FeedbackPolicy(K, lo, hi)


def default_gain(net, max_halvings=60):
    n = net.n_agents
    kappa = 1.0
    for _ in range(max_halvings):
        if spectral_radius(closed_loop_matrix(net, kappa * np.eye(n))) < 1.0:
            return kappa * np.eye(n)
        kappa *= 0.5
    raise ValueError("no admissible gain of the form kappa * I")


def feedback_action(p, mu_estimate, b, u_now=None, delta=0.0):
    mu = as_vector(mu_estimate, p.n, "mu_estimate")
    u_c = p.K @ (1.0 - mu)
    u_c = np.clip(u_c, p.u_c_min, p.u_c_max)
    return enforce_limits(u_c, u_now, b.remaining(), delta)


# --------------------------------------------------------------- CCP ----


@dataclass
class CcpPolicy:
    """Constant control optimized against the asymptotic mean inclination."""

    horizon_T: int
    R: np.ndarray
    S: float
    solved_u: np.ndarray
    predicted_mu: np.ndarray
    objective: float = float("nan")
    kkt_residual: float = float("nan")

    def action(self, t, u_now, b, delta):
        if t >= self.horizon_T:
            return np.zeros_like(self.solved_u)
        return enforce_limits(self.solved_u, u_now, b.remaining(), delta)

    def to_dict(self):
        return {
            "policy": "ccp",
            "T": self.horizon_T,
            "S": self.S,
            "u_inf": self.solved_u.tolist(),
            "mu_inf": self.predicted_mu.tolist(),
            "total_spend": float(self.horizon_T * self.solved_u.sum()),
            "objective": self.objective,
            "kkt_residual": self.kkt_residual,
        }

    def save(self, path):
        Path(path).write_text(json.dumps(self.to_dict(), indent=2) + "\n")


def _weight_matrix(R, n):
    R = np.array(R, dtype=np.float64)
    if R.ndim == 0:
        return float(R) * np.eye(n)
    if R.ndim == 1:
        return np.diag(R)
    if R.shape != (n, n):
        raise DimensionMismatch(f"weight must be {n}x{n}, got {R.shape}")
    return 0.5 * (R + R.T)


def ccp_cost(net, u_o, beta, T, R, S, u):
    """Objective of the constant-control design at a candidate ``u`` (for checks)."""
    ss = SteadyStateSolver(net)
    mu = ss(np.asarray(u_o) + T * np.asarray(u))
    Rm = _weight_matrix(R, net.n_agents)
    w = T * np.asarray(u)
    return float(np.sum((1.0 - mu) ** 2) + w @ Rm @ w + S * (beta - w.sum()) ** 2)


def design_ccp(net, u_o, beta, T, R, S, delta, tol=TOL.qp):
    """Solve the constant-control design problem.

    The asymptotic mean is affine in the per-step control, ``mu_inf = m0 + T G u``
    with ``G = (I - Lambda P)^{-1} (I - Lambda)``, so the design is a QP in
    ``u`` with ``u >= 0``, ``T sum(u) <= beta`` and ``u_o + T u <= 1 - delta``.
    """
    n = net.n_agents
    u_o = as_vector(u_o, n, "u_o")
    if T < 1:
        raise ValueError("T must be at least 1")
    if S < 0:
        raise ValueError("S must be nonnegative")
    if beta < 0:
        raise ValueError("beta must be nonnegative")
    Rm = _weight_matrix(R, n)
    if np.linalg.eigvalsh(Rm).min() <= 0:
        raise ValueError("R must be positive definite")
    ss = SteadyStateSolver(net)
    m0 = ss(u_o)
    M = T * ss.gain()
    ones = np.ones(n)
    gap = 1.0 - m0
    H = 2.0 * (M.T @ M + T * T * Rm + S * T * T * np.outer(ones, ones))
    g = -2.0 * M.T @ gap - 2.0 * S * beta * T * ones
    cap = np.maximum((1.0 - delta) - u_o, 0.0) / T
    prob = QpProblem(H=H, g=g, A_in=T * ones[None, :], b_in=[beta], lb=np.zeros(n), ub=cap)
    sol = solve_qp(prob, tol=tol)
    if sol.status is not QpStatus.OPTIMAL:
        raise NoConvergence(f"CCP design failed: {sol.status.value}, KKT residual {sol.kkt_residual:.3g}")
    u = np.clip(sol.z, 0.0, cap)
    if T * u.sum() > beta:
        u *= beta / (T * u.sum())
    const = float(gap @ gap + S * beta * beta)
    return CcpPolicy(
        horizon_T=int(T),
        R=Rm,
        S=float(S),
        solved_u=u,
        predicted_mu=m0 + M @ u,
        objective=sol.objective + const,
        kkt_residual=sol.kkt_residual,
    )


# --------------------------------------------------------------- MPC ----


class TerminalIndex(str, Enum):
    AT_L = "AtL"
    AT_L_MINUS_1 = "AtLMinus1"


class BudgetMode(str, Enum):
    PAPER = "paper"
    TOTAL = "total"


class PredictionModel(str, Enum):
    LONG = "long"
    SHORT = "short"


@dataclass
class MpcPolicy:
    """Receding-horizon nudging.

    ``model='long'`` predicts with the accumulating reservoir (controls at
    step ``k`` first move the mean at ``k + 2``); ``model='short'`` predicts
    with the one-step baseline. ``Q=None`` solves the discrete Lyapunov
    equation for ``Lambda P`` on first use with each network.
    """

    L: int
    R: object = 10.0
    Q: np.ndarray = None
    terminal_index: TerminalIndex = TerminalIndex.AT_L
    budget_constraint: BudgetMode = BudgetMode.PAPER
    model: PredictionModel = PredictionModel.LONG
    _plans: dict = field(default_factory=dict, repr=False, compare=False)

    def __post_init__(self):
        if self.L < 1:
            raise ValueError("prediction horizon L must be at least 1")
        self.terminal_index = TerminalIndex(self.terminal_index)
        self.budget_constraint = BudgetMode(self.budget_constraint)
        self.model = PredictionModel(self.model)

    def plan_for(self, net):
        key = id(net)
        plan = self._plans.get(key)
        if plan is None or plan.net is not net:
            plan = _MpcPlan(self, net)
            self._plans[key] = plan
        return plan


class _MpcPlan:
    """Condensed prediction and cost for one (policy, network) pair.

    The Hessian, its factor and the constraint matrix depend only on the
    network and weights; each step only rebuilds the linear term and the
    right-hand sides.
    """

    def __init__(self, pol, net):
        self.net = net
        n = net.n_agents
        L = pol.L
        A = net.social
        B = np.diag(1.0 - net.lam)
        self.n = n
        self.L = L
        self.long = pol.model is PredictionModel.LONG
        Rm = _weight_matrix(pol.R, n)
        if np.linalg.eigvalsh(Rm).min() <= 0:
            raise ValueError("R must be positive definite")
        Q = solve_discrete_lyapunov(A) if pol.Q is None else _weight_matrix(pol.Q, n)
        self.Q = Q
        k_term = L if pol.terminal_index is TerminalIndex.AT_L else L - 1

        # powers[k] = A^k, sums[k] = sum_{i<k} A^i
        powers = [np.eye(n)]
        sums = [np.zeros((n, n))]
        for k in range(L + 1):
            sums.append(sums[-1] + powers[-1])
            powers.append(A @ powers[-1])

        # control block tau reaches the mean at tau + lag
        lag = 2 if self.long else 1
        last_weighted = max(L - 1, k_term)
        self.n_blocks = max(0, min(L, last_weighted - lag + 1))
        nb = self.n_blocks
        nz = nb * n

        weights = [np.eye(n) for _ in range(L)] + [np.zeros((n, n))]
        weights[k_term] = weights[k_term] + Q
        self.weights = weights

        gamma = np.zeros((L + 1, n, nz))
        for k in range(L + 1):
            for tau in range(nb):
                if self.long and tau <= k - 2:
                    gamma[k, :, tau * n : (tau + 1) * n] = sums[k - 1 - tau] @ B
                elif not self.long and tau <= k - 1:
                    gamma[k, :, tau * n : (tau + 1) * n] = powers[k - 1 - tau] @ B
        self.gamma = gamma
        self.free_mu = np.stack(powers[: L + 1])
        self.free_u = np.stack([sums[k] @ B for k in range(L + 1)])

        H = np.zeros((nz, nz))
        for k in range(L + 1):
            H += gamma[k].T @ weights[k] @ gamma[k]
        for tau in range(nb):
            H[tau * n : (tau + 1) * n, tau * n : (tau + 1) * n] += Rm
        self.H = 2.0 * (0.5 * (H + H.T))
        self.factor = HessianFactor(self.H) if nz else None
        self._warm = None

        # budget row: paper mode weights every block by its count in
        # u_sum(L-1) + u_sum(L-2); blocks past the effective horizon are zero.
        if pol.budget_constraint is BudgetMode.PAPER and L >= 2:
            coef = np.array([2.0 if tau <= L - 2 else 1.0 for tau in range(nb)])
        else:
            coef = np.ones(nb)
        budget_row = np.repeat(coef, n)
        if self.long:
            # reservoir after the horizon: u_now + sum_tau z_tau <= 1 - delta
            env = np.tile(np.eye(n), (1, nb))
            self.A_in = np.vstack([budget_row[None, :], env]) if nb else np.zeros((0, 0))
        else:
            self.A_in = budget_row[None, :] if nb else np.zeros((0, 0))

    def predict(self, mu_now, u_now, z):
        """Predicted means mu(0..L) for the stacked controls ``z``."""
        f = self.free_mu @ mu_now + self.free_u @ u_now
        if z.size:
            f = f + self.gamma @ z
        return f

    def problem(self, mu_now, u_now, remaining, delta):
        n, nb = self.n, self.n_blocks
        f = self.free_mu @ mu_now + self.free_u @ u_now
        g = np.zeros(nb * n)
        for k in range(self.L + 1):
            g -= 2.0 * self.gamma[k].T @ (self.weights[k] @ (1.0 - f[k]))
        cap = np.maximum((1.0 - delta) - u_now, 0.0)
        if self.long:
            b_in = np.concatenate([[remaining], cap])
            ub = None
        else:
            b_in = np.array([remaining])
            ub = np.tile(cap, nb)
        return QpProblem(H=self.H, g=g, A_in=self.A_in, b_in=b_in, lb=np.zeros(nb * n), ub=ub)

    def solve(self, mu_now, u_now, remaining, delta, tol=TOL.qp):
        n = self.n
        full = np.zeros(self.L * n)
        if self.n_blocks == 0 or remaining <= 0:
            return full, None
        prob = self.problem(mu_now, u_now, remaining, delta)
        sol = solve_qp(prob, tol=tol, factor=self.factor, z0=self._warm)
        if sol.status is not QpStatus.OPTIMAL:
            raise NoConvergence(f"MPC QP failed: {sol.status.value}, KKT residual {sol.kkt_residual:.3g}")
        full[: self.n_blocks * n] = np.maximum(sol.z, 0.0)
        # next step's guess: the plan shifted by one block
        self._warm = np.concatenate([sol.z[n:], sol.z[-n:]])
        return full, sol


def mpc_plan(p, net, mu_now, u_now, b, delta):
    """Full open-loop plan: ``(controls (L, N), predicted means (L+1, N), QpSolution)``."""
    n = net.n_agents
    mu_now = as_vector(mu_now, n, "mu_now")
    u_now = as_vector(u_now, n, "u_now")
    plan = p.plan_for(net)
    z, sol = plan.solve(mu_now, u_now, b.remaining(), delta)
    controls = z.reshape(p.L, n)
    mu = plan.predict(mu_now, u_now, z[: plan.n_blocks * n])
    return controls, mu, sol


def mpc_action(p, net, mu_now, u_now, b, delta):
    """First control of the receding-horizon plan, clipped to the feasible set."""
    controls, _, _ = mpc_plan(p, net, mu_now, u_now, b, delta)
    return enforce_limits(controls[0], u_now, b.remaining(), delta)

"""Dense strictly convex QP solver.

Solves::

    minimize    0.5 z^T H z + g^T z
    subject to  A_in z <= b_in,  lb <= z <= ub

with a dual active-set method (Goldfarb-Idnani). The method starts from the
unconstrained minimizer and adds violated constraints one at a time, so it
terminates at an exact vertex of the KKT system rather than an approximate
iterate. A primal-dual active-set pass runs first because it is much
cheaper when most bounds are active and a good guess exists (the MPC loop);
the dual method is the fallback. Problems whose Hessian is reused can pass a
:class:`HessianFactor` to skip the Cholesky step.
"""

from dataclasses import dataclass, field
from enum import Enum

import numpy as np

from . import _kernels
from .errors import DimensionMismatch
from .numerics import TOL


class QpStatus(str, Enum):
    OPTIMAL = "Optimal"
    MAX_ITERATIONS = "MaxIterations"
    INFEASIBLE = "Infeasible"


@dataclass
class QpProblem:
    H: np.ndarray
    g: np.ndarray
    A_in: np.ndarray = None
    b_in: np.ndarray = None
    lb: np.ndarray = None
    ub: np.ndarray = None

    def __post_init__(self):
        H = np.atleast_2d(np.asarray(self.H, dtype=np.float64))
        n = H.shape[0]
        if H.shape != (n, n):
            raise DimensionMismatch(f"H must be square, got {H.shape}")
        self.H = np.ascontiguousarray(0.5 * (H + H.T))
        self.g = np.asarray(self.g, dtype=np.float64).reshape(-1)
        if self.g.shape[0] != n:
            raise DimensionMismatch(f"g has length {self.g.shape[0]}, expected {n}")
        if self.A_in is None or np.size(self.A_in) == 0:
            self.A_in = np.zeros((0, n))
            self.b_in = np.zeros(0)
        else:
            self.A_in = np.asarray(self.A_in, dtype=np.float64).reshape(-1, n)
            self.b_in = np.asarray(self.b_in, dtype=np.float64).reshape(-1)
            if self.b_in.shape[0] != self.A_in.shape[0]:
                raise DimensionMismatch(
                    f"A_in has {self.A_in.shape[0]} rows but b_in has {self.b_in.shape[0]}"
                )
        self.lb = _bound(self.lb, n, -np.inf, "lb")
        self.ub = _bound(self.ub, n, np.inf, "ub")
        if np.any(self.lb > self.ub):
            raise ValueError("lb must not exceed ub")
        if n <= 64:
            min_eig = np.linalg.eigvalsh(self.H).min() if n else 0.0
            if min_eig < -1e-9:
                raise ValueError(f"H is not positive semidefinite (min eigenvalue {min_eig:.3g})")

    @property
    def n(self):
        return self.H.shape[0]

    def objective(self, z):
        return float(0.5 * z @ self.H @ z + self.g @ z)

    def constraint_form(self):
        """All constraints as ``C z >= d`` (dense rows), dropping infinite bounds."""
        n = self.n
        eye = np.eye(n)
        lo = np.isfinite(self.lb)
        hi = np.isfinite(self.ub)
        rows = [-self.A_in, eye[lo], -eye[hi]]
        rhs = [-self.b_in, self.lb[lo], -self.ub[hi]]
        return np.ascontiguousarray(np.vstack(rows)), np.concatenate(rhs)


def _bound(v, n, fill, name):
    if v is None:
        return np.full(n, fill)
    v = np.asarray(v, dtype=np.float64).reshape(-1)
    if v.shape[0] == 1 and n != 1:
        v = np.full(n, v[0])
    if v.shape[0] != n:
        raise DimensionMismatch(f"{name} has length {v.shape[0]}, expected {n}")
    return v


@dataclass
class QpSolution:
    z: np.ndarray
    objective: float
    status: QpStatus
    kkt_residual: float
    iterations: int = 0
    y_in: np.ndarray = field(default=None, repr=False)
    y_lb: np.ndarray = field(default=None, repr=False)
    y_ub: np.ndarray = field(default=None, repr=False)
    infeasibility: float = 0.0

    @property
    def optimal(self):
        return self.status is QpStatus.OPTIMAL


class HessianFactor:
    """Inverse Cholesky factor of a (regularized) Hessian.

    ``inv_chol`` is ``L^{-1}`` for ``H = L L^T``. Build once, pass to
    :func:`solve_qp` for every problem sharing ``H``.
    """

    def __init__(self, H, reg=TOL.qp_regularization):
        H = np.asarray(H, dtype=np.float64)
        H = 0.5 * (H + H.T)
        n = H.shape[0]
        self.regularization = 0.0
        try:
            L = np.linalg.cholesky(H)
            if n and np.min(np.diag(L)) ** 2 < reg:
                raise np.linalg.LinAlgError
        except np.linalg.LinAlgError:
            # Semidefinite H: lift the smallest curvature to ``reg``.
            min_eig = float(np.linalg.eigvalsh(H).min())
            self.regularization = max(reg, reg - min_eig)
            L = np.linalg.cholesky(H + self.regularization * np.eye(n))
        self.inv_chol = np.ascontiguousarray(
            np.linalg.solve(L, np.eye(n)) if n else np.zeros((0, 0))
        )
        self.n = n


def solve_qp(p, tol=TOL.qp, max_iter=TOL.qp_max_iter, factor=None, z0=None):
    """Solve a :class:`QpProblem`.

    A primal-dual active-set pass is tried first (seeded by ``z0`` when
    given); if it does not certify optimality, the dual active-set method
    takes over from scratch. The returned ``kkt_residual`` is recomputed by
    :func:`kkt_residual` from the final point and multipliers; ``status`` is
    ``Optimal`` only when that residual is within ``tol``.
    """
    if tol <= 0:
        raise ValueError("tol must be positive")
    n = p.n
    if n == 0:
        return QpSolution(np.zeros(0), 0.0, QpStatus.OPTIMAL, 0.0)
    if factor is not None and factor.n != n:
        raise DimensionMismatch("Hessian factor does not match problem size")

    guess = np.full(n, np.nan) if z0 is None else np.asarray(z0, dtype=np.float64).reshape(-1)
    if guess.shape[0] != n:
        raise DimensionMismatch(f"z0 has length {guess.shape[0]}, expected {n}")
    H = p.H
    if factor is not None and factor.regularization:
        H = H + factor.regularization * np.eye(n)
    first = _pdas(p, H, guess, tol)
    if first is not None:
        return first

    if factor is None:
        factor = HessianFactor(p.H)
    C, d = p.constraint_form()
    z, lagr, code, iters, _ = _kernels.gi_solve(
        factor.inv_chol, np.ascontiguousarray(p.g), C, np.ascontiguousarray(d), 1e-13, int(max_iter)
    )
    m_in = p.A_in.shape[0]
    lo = np.isfinite(p.lb)
    hi = np.isfinite(p.ub)
    y_in = lagr[:m_in]
    y_lb = np.zeros(n)
    y_ub = np.zeros(n)
    y_lb[lo] = lagr[m_in : m_in + lo.sum()]
    y_ub[hi] = lagr[m_in + lo.sum() :]
    res = kkt_residual(p, z, y_in, y_lb, y_ub)
    if code == _kernels.GI_INFEASIBLE:
        status = QpStatus.INFEASIBLE
    elif code == _kernels.GI_MAXITER:
        status = QpStatus.MAX_ITERATIONS
    else:
        status = QpStatus.OPTIMAL if res <= tol else QpStatus.MAX_ITERATIONS
    return QpSolution(
        z=z,
        objective=p.objective(z),
        status=status,
        kkt_residual=res,
        iterations=int(iters),
        y_in=y_in,
        y_lb=y_lb,
        y_ub=y_ub,
        infeasibility=primal_violation(p, z),
    )


_PDAS_PASSES = 60


def _pdas(p, H, guess, tol):
    # Rows that can only hold with every variable at its lower bound
    # (sum a_i z_i <= b, a >= 0, sum a_i lb_i >= b) make the active-set
    # guess cycle, so those variables are pinned before the pass.
    A, b = p.A_in, p.b_in
    ub = p.ub.copy()
    pinned_rows = []
    for j in range(A.shape[0]):
        sup = A[j] > 0
        if np.any(A[j] < 0) or not np.all(np.isfinite(p.lb[sup])):
            continue
        floor = float(A[j, sup] @ p.lb[sup])
        if floor >= b[j] - 1e-14 * (1.0 + abs(b[j])) and floor <= b[j] + 1e-14:
            ub[sup] = p.lb[sup]
            pinned_rows.append(j)
    kept = np.setdiff1d(np.arange(A.shape[0]), pinned_rows)
    try:
        z, y_k, y_lb, y_ub, code, iters = _kernels.pdas_solve(
            H, p.g, np.ascontiguousarray(A[kept]), b[kept], p.lb, ub, guess, _PDAS_PASSES
        )
    except (np.linalg.LinAlgError, ZeroDivisionError):
        return None
    if code != 0:
        return None
    y_in = np.zeros(A.shape[0])
    y_in[kept] = y_k
    if pinned_rows:
        grad = p.H @ z + p.g + A.T @ y_in
        for j in pinned_rows:
            sup = A[j] > 0
            y_in[j] = max(0.0, float(np.max(-grad[sup] / A[j, sup])))
            grad = grad + A[j] * y_in[j]
        pinned = ub < p.ub
        y_lb[pinned] = np.maximum(grad[pinned], 0.0)
        y_ub[pinned] = 0.0
    res = kkt_residual(p, z, y_in, y_lb, y_ub)
    if res > tol:
        return None
    return QpSolution(z, p.objective(z), QpStatus.OPTIMAL, res, int(iters), y_in, y_lb, y_ub, 0.0)


def primal_violation(p, z):
    viol = 0.0
    if p.A_in.shape[0]:
        viol = max(viol, float(np.max(p.A_in @ z - p.b_in, initial=0.0)))
    viol = max(viol, float(np.max(p.lb - z, initial=0.0)))
    viol = max(viol, float(np.max(z - p.ub, initial=0.0)))
    return viol


def kkt_residual(p, z, y_in=None, y_lb=None, y_ub=None, active_tol=1e-7):
    """Largest violation of the KKT conditions at ``z``.

    Covers primal feasibility, stationarity ``Hz + g + A^T y + y_ub - y_lb``,
    dual feasibility and complementary slackness. Multipliers that are not
    supplied are estimated by nonnegative least squares over the constraints
    whose slack is below ``active_tol``, so the check can be run without
    trusting any solver bookkeeping.
    """
    z = np.asarray(z, dtype=np.float64)
    n = p.n
    slack_in = p.b_in - p.A_in @ z
    slack_lb = np.where(np.isfinite(p.lb), z - p.lb, np.inf)
    slack_ub = np.where(np.isfinite(p.ub), p.ub - z, np.inf)
    grad = p.H @ z + p.g
    if y_in is None or y_lb is None or y_ub is None:
        y_in, y_lb, y_ub = _estimate_multipliers(p, grad, slack_in, slack_lb, slack_ub, active_tol)
    stat = grad + p.A_in.T @ y_in + y_ub - y_lb
    parts = [
        np.max(-slack_in, initial=0.0),
        np.max(-slack_lb, initial=0.0),
        np.max(-slack_ub, initial=0.0),
        np.max(np.abs(stat), initial=0.0),
        np.max(-y_in, initial=0.0),
        np.max(-y_lb, initial=0.0),
        np.max(-y_ub, initial=0.0),
        np.max(np.abs(y_in * slack_in), initial=0.0),
        np.max(np.abs(_finite_mul(y_lb, slack_lb)), initial=0.0),
        np.max(np.abs(_finite_mul(y_ub, slack_ub)), initial=0.0),
    ]
    return float(max(parts)) + 0.0 if n else 0.0


def _finite_mul(y, slack):
    out = np.zeros_like(y)
    mask = np.isfinite(slack)
    out[mask] = y[mask] * slack[mask]
    return out


def _estimate_multipliers(p, grad, slack_in, slack_lb, slack_ub, active_tol):
    from scipy.optimize import nnls

    n = p.n
    cols = []
    tags = []
    for i in np.flatnonzero(slack_in <= active_tol):
        cols.append(p.A_in[i])
        tags.append(("in", i))
    for i in np.flatnonzero(slack_lb <= active_tol):
        e = np.zeros(n)
        e[i] = -1.0
        cols.append(e)
        tags.append(("lb", i))
    for i in np.flatnonzero(slack_ub <= active_tol):
        e = np.zeros(n)
        e[i] = 1.0
        cols.append(e)
        tags.append(("ub", i))
    y_in = np.zeros(p.A_in.shape[0])
    y_lb = np.zeros(n)
    y_ub = np.zeros(n)
    if cols:
        # grad + M y = 0 with y >= 0
        M = np.column_stack(cols)
        y, _ = nnls(M, -grad)
        for (kind, i), val in zip(tags, y):
            {"in": y_in, "lb": y_lb, "ub": y_ub}[kind][i] = val
    return y_in, y_lb, y_ub

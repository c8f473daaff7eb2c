"""Dense linear-algebra helpers: linear solves, spectral radius, discrete Lyapunov."""

from dataclasses import dataclass

import numpy as np

from . import _kernels
from .errors import DimensionMismatch, NoConvergence, SingularMatrix, UnstableMatrix


@dataclass(frozen=True)
class Tolerances:
    pivot: float = 1e-12
    solve_residual: float = 1e-10
    spectral: float = 1e-9
    lyap_increment: float = 1e-12
    lyap_residual: float = 1e-8
    lyap_max_terms: int = 200_000
    qp: float = 1e-8
    qp_max_iter: int = 50_000
    qp_regularization: float = 1e-9
    row_sum: float = 1e-12


TOL = Tolerances()


def as_square(a, name="A"):
    a = np.ascontiguousarray(a, dtype=np.float64)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise DimensionMismatch(f"{name} must be square, got shape {a.shape}")
    if not np.all(np.isfinite(a)):
        raise ValueError(f"{name} has non-finite entries")
    return a


def as_vector(v, n=None, name="v"):
    v = np.ascontiguousarray(v, dtype=np.float64).reshape(-1)
    if n is not None and v.shape[0] != n:
        raise DimensionMismatch(f"{name} must have length {n}, got {v.shape[0]}")
    if not np.all(np.isfinite(v)):
        raise ValueError(f"{name} has non-finite entries")
    return v


class LUFactor:
    """Partial-pivoting LU of a square matrix, reusable for many right-hand sides."""

    def __init__(self, a, pivot_tol=TOL.pivot):
        a = as_square(a)
        lu, perm, bad = _kernels.lu_factor(a, pivot_tol)
        if bad >= 0:
            raise SingularMatrix(f"pivot below {pivot_tol:g} at column {bad}")
        self.n = a.shape[0]
        self._lu = lu
        self._perm = perm

    def solve(self, b):
        b = as_vector(b, self.n, "b")
        return _kernels.lu_solve(self._lu, self._perm, b)

    def solve_matrix(self, b):
        b = np.asarray(b, dtype=np.float64)
        return np.column_stack([self.solve(b[:, j]) for j in range(b.shape[1])])


def solve_linear(a, b, pivot_tol=TOL.pivot):
    """Solve ``A z = b``; raises :class:`SingularMatrix` on a vanishing pivot."""
    a = as_square(a)
    b = as_vector(b, a.shape[0], "b")
    return LUFactor(a, pivot_tol).solve(b)


def spectral_radius(a, tol=TOL.spectral):
    """Largest eigenvalue modulus of ``a``.

    Computed from the full eigenvalue set (LAPACK ``geev``), which is accurate
    far below any ``tol`` used in this package.
    """
    if tol <= 0:
        raise ValueError("tol must be positive")
    a = as_square(a)
    if a.shape[0] == 0:
        return 0.0
    try:
        eig = np.linalg.eigvals(a)
    except np.linalg.LinAlgError as exc:
        raise NoConvergence(f"eigenvalue iteration failed: {exc}") from exc
    return float(np.max(np.abs(eig)))


def solve_discrete_lyapunov(a, tol=TOL):
    """Return the symmetric ``Q`` with ``A^T Q A - Q = -I``.

    Parameters
    ----------
    a : array_like, shape (n, n)
        Schur-stable matrix.
    tol : Tolerances
        ``lyap_increment`` stops the series, ``lyap_residual`` is the
        acceptance bound on the returned solution.

    Raises
    ------
    UnstableMatrix
        If ``rho(a) >= 1``.
    NoConvergence
        If neither the series nor the vectorized fallback reaches the residual bound.
    """
    a = as_square(a)
    rho = spectral_radius(a)
    if rho >= 1.0:
        raise UnstableMatrix(f"spectral radius {rho:.6g} >= 1")
    n = a.shape[0]
    q, _, converged = _kernels.lyapunov_series(a, tol.lyap_increment, tol.lyap_max_terms)
    if not converged:
        # vec(Q) = (I - A^T (x) A^T)^{-1} vec(I)
        kron = np.eye(n * n) - np.kron(a.T, a.T)
        q = solve_linear(kron, np.eye(n).reshape(-1)).reshape(n, n)
    q = 0.5 * (q + q.T)
    if lyapunov_residual(a, q) > tol.lyap_residual:
        raise NoConvergence("Lyapunov residual above tolerance")
    return q


def lyapunov_residual(a, q):
    a = np.asarray(a, dtype=np.float64)
    return float(np.max(np.abs(a.T @ q @ a - q + np.eye(a.shape[0]))))

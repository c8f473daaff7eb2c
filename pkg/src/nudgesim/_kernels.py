"""Hot numeric kernels.

Every function here is written in the numba-compatible subset of numpy and is
compiled with ``@njit`` unless ``NUDGESIM_DISABLE_JIT`` is set, in which case
the identical source runs as plain numpy. Arrays passed in must be float64
and C-contiguous; callers in the public modules take care of that.
"""

import math
import warnings

import numpy as np

from ._accel import USE_NUMBA, maybe_njit

if USE_NUMBA:
    from numba.core.errors import NumbaPerformanceWarning

    warnings.simplefilter("ignore", category=NumbaPerformanceWarning)

# Status codes shared with qp.py
GI_OPTIMAL = 0
GI_INFEASIBLE = 1
GI_MAXITER = 2


# ---------------------------------------------------------------- LU ----


@maybe_njit
def lu_factor(a, pivot_tol):
    """In-place-style LU with partial pivoting.

    Returns ``(lu, perm, bad)`` where ``bad`` is the column index at which a
    pivot fell below ``pivot_tol`` (``-1`` if the factorization succeeded).
    """
    n = a.shape[0]
    lu = a.copy()
    perm = np.arange(n)
    for k in range(n):
        p = k
        best = abs(lu[k, k])
        for i in range(k + 1, n):
            v = abs(lu[i, k])
            if v > best:
                best = v
                p = i
        if best < pivot_tol:
            return lu, perm, k
        if p != k:
            row = lu[k, :].copy()
            lu[k, :] = lu[p, :]
            lu[p, :] = row
            tmp = perm[k]
            perm[k] = perm[p]
            perm[p] = tmp
        piv = lu[k, k]
        for i in range(k + 1, n):
            lu[i, k] /= piv
        if k + 1 < n:
            lu[k + 1 :, k + 1 :] -= np.outer(lu[k + 1 :, k], lu[k, k + 1 :])
    return lu, perm, -1


@maybe_njit
def lu_solve(lu, perm, b):
    n = lu.shape[0]
    y = np.empty(n)
    for i in range(n):
        y[i] = b[perm[i]]
    for i in range(n):
        acc = y[i]
        for j in range(i):
            acc -= lu[i, j] * y[j]
        y[i] = acc
    for i in range(n - 1, -1, -1):
        acc = y[i]
        for j in range(i + 1, n):
            acc -= lu[i, j] * y[j]
        y[i] = acc / lu[i, i]
    return y


# --------------------------------------------------------- Lyapunov ----


@maybe_njit
def lyapunov_series(a, incr_tol, max_terms):
    """Sum ``Q = sum_k (A^T)^k A^k`` until the next term drops below ``incr_tol``.

    The residual ``A^T Q A - Q + I`` of the truncated sum equals the first
    omitted term, so the stopping rule bounds the residual directly.
    Returns ``(Q, n_terms, converged)``.
    """
    n = a.shape[0]
    q = np.eye(n)
    term = np.eye(n)
    at = a.T.copy()
    for k in range(1, max_terms + 1):
        term = at @ term @ a
        if np.max(np.abs(term)) < incr_tol:
            return q, k, True
        q += term
    return q, max_terms, False


# ---------------------------------------------------- Goldfarb-Idnani ----


@maybe_njit
def _upper_solve(r, d, q):
    out = np.empty(q)
    for i in range(q - 1, -1, -1):
        acc = d[i]
        for j in range(i + 1, q):
            acc -= r[i, j] * out[j]
        out[i] = acc / r[i, i]
    return out


@maybe_njit
def _drop_active(jt, r, act, u, q, l):
    """Remove active entry ``l`` and restore the triangular factor.

    ``jt`` holds J^T (rows are the columns of J); the rotations that re-
    triangularize R act on rows of R and on the matching rows of ``jt``.
    """
    for c in range(l, q - 1):
        r[: q, c] = r[: q, c + 1]
        act[c] = act[c + 1]
        u[c] = u[c + 1]
    r[:, q - 1] = 0.0
    for j in range(l, q - 1):
        a = r[j, j]
        b = r[j + 1, j]
        h = math.hypot(a, b)
        if h == 0.0:
            continue
        c = a / h
        s = b / h
        rj = r[j, j : q - 1].copy()
        rj1 = r[j + 1, j : q - 1].copy()
        r[j, j : q - 1] = c * rj + s * rj1
        r[j + 1, j : q - 1] = -s * rj + c * rj1
        r[j + 1, j] = 0.0
        row_j = jt[j, :].copy()
        row_j1 = jt[j + 1, :].copy()
        jt[j, :] = c * row_j + s * row_j1
        jt[j + 1, :] = -s * row_j + c * row_j1
    r[q - 1, :] = 0.0
    return q - 1


@maybe_njit
def _add_active(jt, r, d, q):
    """Rotate ``d = J^T n_p`` so entries below ``q`` vanish, then store it as R's new column."""
    n = d.shape[0]
    for j in range(n - 1, q, -1):
        a = d[j - 1]
        b = d[j]
        if b == 0.0:
            continue
        h = math.hypot(a, b)
        c = a / h
        s = b / h
        d[j - 1] = h
        d[j] = 0.0
        row_a = jt[j - 1, :].copy()
        row_b = jt[j, :].copy()
        jt[j - 1, :] = c * row_a + s * row_b
        jt[j, :] = -s * row_a + c * row_b
    for i in range(q + 1):
        r[i, q] = d[i]


@maybe_njit
def gi_solve(jt0, a, ct, b, feas_tol, max_iter):
    """Dual active-set QP (Goldfarb-Idnani) for a strictly convex objective.

    Minimizes ``0.5 x^T G x + a^T x`` subject to ``ct @ x >= b`` where
    ``jt0 = L^{-1}`` for the Cholesky factor ``G = L L^T`` (so that
    ``jt0^T jt0 = G^{-1}``).

    Returns ``(x, lagr, status, iterations, worst_violation)``; ``lagr`` holds
    the nonnegative multiplier of every constraint (zero when inactive).
    """
    n = jt0.shape[0]
    m = ct.shape[0]
    jt = jt0.copy()
    r = np.zeros((n, n))
    act = np.full(n, -1)
    u = np.zeros(n)
    is_act = np.zeros(m, dtype=np.bool_)
    q = 0

    x = -(jt @ a) @ jt
    row_norm = np.empty(m)
    for i in range(m):
        row_norm[i] = max(np.sqrt(np.dot(ct[i], ct[i])), 1e-300)

    status = GI_MAXITER
    it = 0
    worst = 0.0
    while it < max_iter:
        it += 1
        s = ct @ x - b
        p = -1
        worst = 0.0
        for i in range(m):
            if is_act[i]:
                continue
            v = s[i] / row_norm[i]
            if v < -feas_tol * (1.0 + abs(b[i]) / row_norm[i]) and v < worst:
                worst = v
                p = i
        if p < 0:
            status = GI_OPTIMAL
            break

        n_p = ct[p].copy()
        u_p = 0.0
        added = False
        infeasible = False
        while not added:
            d = jt @ n_p
            rr = _upper_solve(r, d, q)
            z = d[q:] @ jt[q:, :]
            d2 = np.dot(d[q:], d[q:])
            dd = np.dot(d, d)

            t1 = np.inf
            l = -1
            if q > 0:
                rmax = np.max(np.abs(rr))
                for j in range(q):
                    if rr[j] > 1e-14 * (1.0 + rmax):
                        ratio = u[j] / rr[j]
                        if ratio < t1:
                            t1 = ratio
                            l = j

            if d2 <= 1e-14 * dd:
                t2 = np.inf
            else:
                t2 = -(np.dot(n_p, x) - b[p]) / np.dot(z, n_p)

            if t1 == np.inf and t2 == np.inf:
                infeasible = True
                break
            if t2 == np.inf:
                for j in range(q):
                    u[j] -= t1 * rr[j]
                u_p += t1
                is_act[act[l]] = False
                q = _drop_active(jt, r, act, u, q, l)
                continue

            t = min(t1, t2)
            x = x + t * z
            for j in range(q):
                u[j] -= t * rr[j]
            u_p += t
            if t2 <= t1:
                _add_active(jt, r, d, q)
                act[q] = p
                u[q] = u_p
                is_act[p] = True
                q += 1
                added = True
            else:
                is_act[act[l]] = False
                q = _drop_active(jt, r, act, u, q, l)
        if infeasible:
            status = GI_INFEASIBLE
            break

    lagr = np.zeros(m)
    for j in range(q):
        lagr[act[j]] = max(u[j], 0.0)
    return x, lagr, status, it, worst


# ------------------------------------------------------- simulation ----


@maybe_njit
def simulate_long_term_batch(ap, one_minus_lam, x0, u0, uc_schedule, noise):
    """Step the saturated-integrator model for many independent runs.

    ``noise`` has shape (runs, T, N); ``uc_schedule`` has shape (T, N) and is
    shared by all runs (open-loop input). Returns x(T) for every run.
    """
    runs, horizon, n = noise.shape
    out = np.empty((runs, n))
    for k in range(runs):
        x = x0.copy()
        u = u0.copy()
        for t in range(horizon):
            drive = np.minimum(np.maximum(u + noise[k, t], 0.0), 1.0)
            x = ap @ x + one_minus_lam * drive
            u = u + uc_schedule[t]
        out[k] = x
    return out


# ------------------------------------------------ primal-dual active set ----


@maybe_njit
def pdas_solve(h, g, a, b, lb, ub, z0, max_iter):
    """Primal-dual active-set iteration for a QP with bounds and inequality rows.

    Each pass fixes the guessed active bounds, treats the guessed active rows
    as equalities, solves the reduced KKT system, and re-guesses from the sign
    of the resulting multipliers and the primal violations. It converges in a
    handful of passes from a good initial guess ``z0`` but is not globally
    convergent, so callers fall back to :func:`gi_solve` on failure.

    Returns ``(z, y_in, y_lb, y_ub, status, iterations)``; ``status`` is 0 on
    convergence, 2 when the pass limit is hit, 3 when a reduced system is
    singular.
    """
    n = h.shape[0]
    m = a.shape[0]
    # 0 free, 1 at lower, 2 at upper
    state = np.zeros(n, dtype=np.int64)
    row_act = np.zeros(m, dtype=np.bool_)
    for i in range(n):
        if z0[i] <= lb[i]:
            state[i] = 1
        elif z0[i] >= ub[i]:
            state[i] = 2
    if m > 0:
        s0 = a @ z0 - b
        for j in range(m):
            row_act[j] = s0[j] >= -1e-12 * (1.0 + abs(b[j]))

    z = np.zeros(n)
    y_in = np.zeros(m)
    y_lb = np.zeros(n)
    y_ub = np.zeros(n)
    for it in range(1, max_iter + 1):
        for i in range(n):
            if state[i] == 1:
                z[i] = lb[i]
            elif state[i] == 2:
                z[i] = ub[i]
        free = np.flatnonzero(state == 0)
        # an active row with no free support carries no information
        keep = np.zeros(m, dtype=np.bool_)
        for j in range(m):
            if row_act[j]:
                for k in range(free.shape[0]):
                    if a[j, free[k]] != 0.0:
                        keep[j] = True
                        break
        rows = np.flatnonzero(keep)
        nf = free.shape[0]
        nr = rows.shape[0]
        fixed_z = z.copy()
        for k in range(nf):
            fixed_z[free[k]] = 0.0
        rhs_top = -(g + h @ fixed_z)
        kkt = np.zeros((nf + nr, nf + nr))
        rhs = np.zeros(nf + nr)
        for p in range(nf):
            fp = free[p]
            rhs[p] = rhs_top[fp]
            for q in range(nf):
                kkt[p, q] = h[fp, free[q]]
            for r in range(nr):
                kkt[p, nf + r] = a[rows[r], fp]
                kkt[nf + r, p] = a[rows[r], fp]
        if nr > 0:
            ab = a @ fixed_z
            for r in range(nr):
                rhs[nf + r] = b[rows[r]] - ab[rows[r]]
        if nf + nr > 0:
            # a zero pivot or a dependent active row leaves the system singular
            diag_scale = 0.0
            for p in range(nf):
                diag_scale = max(diag_scale, abs(kkt[p, p]))
            sol = np.linalg.solve(kkt, rhs)
            if not np.all(np.isfinite(sol)):
                return z, y_in, y_lb, y_ub, 3, it
            resid = kkt @ sol - rhs
            if np.max(np.abs(resid)) > 1e-8 * (1.0 + np.max(np.abs(rhs)) + diag_scale * np.max(np.abs(sol))):
                return z, y_in, y_lb, y_ub, 3, it
        else:
            sol = np.zeros(0)
        for p in range(nf):
            z[free[p]] = sol[p]
        y_in[:] = 0.0
        for r in range(nr):
            y_in[rows[r]] = sol[nf + r]
        grad = h @ z + g
        if m > 0:
            grad = grad + a.T @ y_in
        gtol = 1e-13 * (1.0 + np.max(np.abs(grad)))
        y_lb[:] = 0.0
        y_ub[:] = 0.0
        changed = False
        for i in range(n):
            if state[i] == 1:
                y_lb[i] = grad[i]
                if grad[i] < -gtol:
                    state[i] = 0
                    changed = True
            elif state[i] == 2:
                y_ub[i] = -grad[i]
                if grad[i] > gtol:
                    state[i] = 0
                    changed = True
            else:
                if z[i] < lb[i]:
                    state[i] = 1
                    changed = True
                elif z[i] > ub[i]:
                    state[i] = 2
                    changed = True
        if m > 0:
            s = a @ z - b
            for j in range(m):
                if keep[j]:
                    if y_in[j] < 0.0:
                        row_act[j] = False
                        changed = True
                elif row_act[j]:
                    row_act[j] = False
                elif s[j] > 1e-12 * (1.0 + abs(b[j])):
                    row_act[j] = True
                    changed = True
        if not changed:
            return z, y_in, y_lb, y_ub, 0, it
    return z, y_in, y_lb, y_ub, 2, max_iter

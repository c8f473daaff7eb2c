"""Independent reference computations used by the test-suite."""

import itertools

import numpy as np


def _face_search(H, g, C, d, base, basis, radius, final_step):
    # coarse-to-fine grid over t with z = base + basis @ t, keeping C z <= d
    k = basis.shape[1]

    def scan(center, half, step):
        axes = [np.arange(center[i] - half, center[i] + half + step / 2, step) for i in range(k)]
        t = np.array(list(itertools.product(*axes)))
        z = base + t @ basis.T
        ok = np.all(z @ C.T <= d + 1e-9, axis=1)
        if not ok.any():
            return None, None
        z = z[ok]
        f = 0.5 * np.einsum("ij,jk,ik->i", z, H, z) + z @ g
        j = np.argmin(f)
        return t[ok][j], f[j]

    coarse = {1: 0.01, 2: 0.02, 3: 0.05}[k]
    center, _ = scan(np.zeros(k), radius, coarse)
    if center is None:
        return None, np.inf
    val = np.inf
    for step, half in ((coarse / 5, 3 * coarse), (final_step, 15 * final_step)):
        for _ in range(400):
            new, val = scan(center, half, step)
            moved = np.max(np.abs(new - center)) > half / 2
            center = new
            if not moved:
                break
    return base + basis @ center, val


def grid_argmin(H, g, A, b, lb, ub, final_step=1e-3):
    """Brute-force grid search for min 0.5 z'Hz + g'z over the feasible polytope.

    Every face (each subset of constraints held with equality) is searched on
    its own grid, so optima lying on a slanted face are resolved to about
    ``final_step`` instead of the staircase error of a single box grid. Each
    face is scanned coarse-to-fine, which is exhaustive for strictly convex
    objectives.
    """
    n = len(g)
    eye = np.eye(n)
    C = np.vstack([np.asarray(A, float).reshape(-1, n), eye, -eye])
    d = np.concatenate([np.asarray(b, float).reshape(-1), ub, -np.asarray(lb, float)])
    radius = float(np.linalg.norm(np.asarray(ub) - np.asarray(lb))) + 0.1
    best, best_f = None, np.inf
    for size in range(0, n + 1):
        for rows in itertools.combinations(range(len(d)), size):
            Cs = C[list(rows)]
            if size and np.linalg.matrix_rank(Cs) < size:
                continue
            if size:
                base = np.linalg.lstsq(Cs, d[list(rows)], rcond=None)[0]
                _, sv, vt = np.linalg.svd(Cs)
                basis = vt[size:].T
            else:
                base = 0.5 * (np.asarray(lb) + np.asarray(ub))
                basis = eye
            if size == n:
                z = base
                if np.all(C @ z <= d + 1e-9):
                    f = 0.5 * z @ H @ z + g @ z
                    if f < best_f:
                        best, best_f = z, f
                continue
            z, f = _face_search(H, g, C, d, base, basis, radius, final_step)
            if f < best_f:
                best, best_f = z, f
    return best


def transitive_unreachable(weights, lam):
    """Agents with no directed path (following influence edges v->w when
    weights[v, w] > 0) to an agent with lam < 1, via Warshall closure."""
    n = len(lam)
    reach = (np.asarray(weights) > 0) | np.eye(n, dtype=bool)
    for k in range(n):
        reach = reach | (reach[:, [k]] & reach[[k], :])
    good = np.asarray(lam) < 1
    return [v for v in range(n) if not np.any(reach[v] & good)]


def random_qp(rng, n, m):
    """Strictly convex QP with a feasible box and rows slack at the box centre."""
    M = rng.normal(size=(n, n))
    H = M @ M.T + 0.5 * np.eye(n)
    g = rng.normal(size=n) * 2
    lb = -rng.uniform(0.2, 1.0, n)
    ub = rng.uniform(0.2, 1.0, n)
    c = 0.5 * (lb + ub)
    A = rng.normal(size=(m, n))
    b = A @ c + rng.uniform(0.05, 0.5, m)
    return H, g, A, b, lb, ub

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from nudgesim.errors import DimensionMismatch
from nudgesim.qp import HessianFactor, QpProblem, QpStatus, kkt_residual, primal_violation, solve_qp
from oracles import grid_argmin, random_qp


def test_clipped_scalar():
    s = solve_qp(QpProblem([[2.0]], [-2.0], lb=[0.0], ub=[0.5]))
    assert s.status is QpStatus.OPTIMAL
    assert s.z[0] == pytest.approx(0.5, abs=1e-12)
    assert s.y_ub[0] == pytest.approx(1.0, abs=1e-12)


def test_unconstrained_origin():
    s = solve_qp(QpProblem(np.eye(2), [0.0, 0.0]))
    assert np.allclose(s.z, 0.0) and s.optimal


def test_single_active_row():
    s = solve_qp(QpProblem(np.eye(2), [0.0, 0.0], A_in=[[-1.0, -1.0]], b_in=[-1.0]))
    assert np.allclose(s.z, [0.5, 0.5], atol=1e-12)
    assert s.y_in[0] == pytest.approx(0.5, abs=1e-12)


def test_infeasible():
    s = solve_qp(QpProblem(np.eye(1), [0.0], A_in=[[1.0]], b_in=[-1.0], lb=[0.0]))
    assert s.status is QpStatus.INFEASIBLE
    assert s.infeasibility > 0


def test_semidefinite_hessian_regularized():
    # H singular along (1,-1); the sum constraint pins the solution
    H = np.ones((2, 2))
    s = solve_qp(QpProblem(H, [-2.0, -2.0], A_in=[[1.0, 1.0]], b_in=[0.5], lb=[0, 0], ub=[0.5, 0.5]))
    assert s.optimal
    assert s.z.sum() == pytest.approx(0.5, abs=1e-7)


def test_rejects_nonconvex_and_bad_shapes():
    with pytest.raises(ValueError):
        QpProblem([[-1.0]], [0.0])
    with pytest.raises(DimensionMismatch):
        QpProblem(np.eye(2), [0.0])
    with pytest.raises(ValueError):
        QpProblem(np.eye(1), [0.0], lb=[1.0], ub=[0.0])


def test_factor_mismatch():
    with pytest.raises(DimensionMismatch):
        solve_qp(QpProblem(np.eye(2), [0, 0]), factor=HessianFactor(np.eye(3)))


def test_warm_start_does_not_change_answer():
    rng = np.random.default_rng(3)
    H, g, A, b, lb, ub = random_qp(rng, 8, 3)
    p = QpProblem(H, g, A, b, lb, ub)
    cold = solve_qp(p)
    for guess in (lb, ub, np.zeros(8), rng.uniform(lb, ub)):
        warm = solve_qp(p, z0=guess)
        assert np.allclose(warm.z, cold.z, atol=1e-9)


def test_kkt_checker_flags_wrong_point():
    p = QpProblem([[2.0]], [-2.0], lb=[0.0], ub=[0.5])
    assert kkt_residual(p, np.array([0.5])) <= 1e-12
    assert kkt_residual(p, np.array([0.3])) > 0.1
    assert primal_violation(p, np.array([0.7])) == pytest.approx(0.2)


@settings(max_examples=25, deadline=None)
@given(st.integers(1, 3), st.integers(0, 3), st.integers(0, 2**31 - 1))
def test_matches_grid_oracle(n, m, seed):
    rng = np.random.default_rng(seed)
    H, g, A, b, lb, ub = random_qp(rng, n, m)
    s = solve_qp(QpProblem(H, g, A, b, lb, ub))
    assert s.status is QpStatus.OPTIMAL
    ref = grid_argmin(H, g, A, b, lb, ub)
    assert np.max(np.abs(s.z - ref)) <= 5e-3
    # independent multiplier estimate, not the solver's
    assert kkt_residual(QpProblem(H, g, A, b, lb, ub), s.z) <= 1e-8


@settings(max_examples=40, deadline=None)
@given(st.integers(1, 10), st.integers(0, 5), st.floats(1e-3, 1e3), st.integers(0, 2**31 - 1))
def test_scaling_invariance(n, m, c, seed):
    rng = np.random.default_rng(seed)
    H, g, A, b, lb, ub = random_qp(rng, n, m)
    z1 = solve_qp(QpProblem(H, g, A, b, lb, ub)).z
    z2 = solve_qp(QpProblem(c * H, c * g, A, b, lb, ub)).z
    assert np.allclose(z1, z2, atol=1e-8)


@settings(max_examples=40, deadline=None)
@given(st.integers(5, 40), st.integers(0, 2**31 - 1))
def test_larger_problems_kkt(n, seed):
    rng = np.random.default_rng(seed)
    H, g, A, b, lb, ub = random_qp(rng, n, n // 3)
    s = solve_qp(QpProblem(H, g, A, b, lb, ub))
    assert s.optimal and s.kkt_residual <= 1e-8

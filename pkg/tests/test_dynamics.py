import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from nudgesim.dynamics import (
    NO_NOISE,
    NoiseModel,
    SimulationState,
    SteadyStateSolver,
    expected_step,
    simulate_open_loop,
    simulate_open_loop_numpy,
    steady_state,
    step_long_term,
    step_short_term,
    stream,
)
from nudgesim.errors import DimensionMismatch, NegativeControl
from nudgesim.network import build_network
from nudgesim.numerics import spectral_radius
from conftest import random_network


def test_zero_susceptibility_copies_input():
    net = build_network(np.ones((3, 3)), [0.0, 0.0, 0.0])
    s = SimulationState(x=np.array([0.1, 0.9, 0.4]), u=np.full(3, 0.7), rng=stream(0, 0))
    s2 = step_long_term(net, s, np.zeros(3), NO_NOISE)
    assert np.allclose(s2.x, 0.7, atol=1e-15)
    assert s2.t == 1


def test_two_agent_step(two_agent):
    s = SimulationState(x=np.array([0.0, 1.0]), u=np.array([0.2, 0.8]), rng=stream(0, 0))
    s2 = step_long_term(two_agent, s, np.zeros(2), NO_NOISE)
    assert np.allclose(s2.x, [0.6, 0.4], atol=1e-15)
    assert np.allclose(step_short_term(two_agent, np.array([0.0, 1.0]), [0.2, 0.8], [0, 0]), [0.6, 0.4])
    assert np.allclose(expected_step(two_agent, np.array([0.0, 1.0]), np.array([0.2, 0.8])), [0.6, 0.4])


def test_reservoir_accumulates(two_agent):
    s = SimulationState(x=np.zeros(2), u=np.array([0.2, 0.3]), rng=stream(0, 0))
    s2 = step_long_term(two_agent, s, np.array([0.1, 0.0]), NO_NOISE)
    assert np.allclose(s2.u, [0.3, 0.3])


def test_saturation_before_mixing():
    net = build_network(np.eye(2), [0.0, 0.0])
    s = SimulationState(x=np.zeros(2), u=np.array([1.2, 0.5]), rng=stream(0, 0))
    assert np.allclose(step_long_term(net, s, np.zeros(2), NO_NOISE).x, [1.0, 0.5])


def test_negative_control_rejected(two_agent):
    s = SimulationState.initial([0.2, 0.8], rng=stream(0, 0))
    with pytest.raises(NegativeControl):
        step_long_term(two_agent, s, np.array([-0.1, 0.0]), NO_NOISE)
    with pytest.raises(NegativeControl):
        step_short_term(two_agent, s.x, s.u, np.array([0.0, -1.0]))


def test_dimension_checks(two_agent):
    with pytest.raises(DimensionMismatch):
        expected_step(two_agent, np.zeros(3), np.zeros(2))


def test_short_term_fixed_point():
    net = build_network(np.ones((2, 2)), [0.0, 0.0])
    mu = np.array([0.3, 0.6])
    for _ in range(5):
        mu = step_short_term(net, mu, [0.3, 0.6], [0.0, 0.0])
    assert np.allclose(mu, [0.3, 0.6])


def test_expected_step_consensus_and_adoption(paper_net):
    c = np.full(20, 0.37)
    assert np.allclose(expected_step(paper_net, c, c), c, atol=1e-15)
    one = np.ones(20)
    assert np.allclose(expected_step(paper_net, one, one), one, atol=1e-15)


def test_steady_state_examples(two_agent):
    net0 = build_network(np.ones((2, 2)), [0.0, 0.0])
    assert np.allclose(steady_state(net0, [0.2, 0.8]), [0.2, 0.8])
    lo = steady_state(two_agent, [0.2, 0.8])
    assert np.allclose(lo, [0.4, 0.6], atol=1e-14)
    hi = steady_state(two_agent, np.array([0.2, 0.8]) + 0.2)
    assert np.allclose(hi, [0.6, 0.8], atol=1e-14)
    assert np.all(hi > lo)


def test_gain_matrix_row_stochastic(paper_net):
    G = SteadyStateSolver(paper_net).gain()
    assert np.all(G >= -1e-15)
    assert np.allclose(G.sum(axis=1), 1.0, atol=1e-12)


def test_noise_statistics():
    delta = 0.025
    draws = NoiseModel(delta).draw(stream(5, 0), 100_000 * 4).reshape(100_000, 4)
    assert np.all(np.abs(draws) <= delta)
    assert np.all(np.abs(draws.mean(axis=0)) <= 3 * delta / np.sqrt(3 * 100_000))


def test_noise_assumption_two():
    with pytest.raises(ValueError, match="Assumption 2"):
        NoiseModel(0.3).check_bias([0.2, 0.8])
    NoiseModel(0.025).check_bias([0.2, 0.8])


def test_streams_independent_of_order():
    a = stream(7, 3).random(5)
    stream(7, 2).random(100)
    assert np.array_equal(a, stream(7, 3).random(5))
    assert not np.array_equal(a, stream(7, 4).random(5))


def test_kernel_matches_numpy_reference(paper_net):
    u_o = np.linspace(0.1, 0.8, 20)
    sched = np.zeros((50, 20))
    sched[:5] = 0.01
    a = simulate_open_loop(paper_net, u_o, NoiseModel(0.025), 50, [stream(1, i) for i in range(4)], sched)
    b = simulate_open_loop_numpy(paper_net, u_o, NoiseModel(0.025), 50, [stream(1, i) for i in range(4)], sched)
    assert np.allclose(a, b, atol=1e-13)


def test_kernel_matches_stepper(paper_net):
    u_o = np.linspace(0.1, 0.8, 20)
    noise = NoiseModel(0.025)
    batch = simulate_open_loop(paper_net, u_o, noise, 30, [stream(2, 0)])
    s = SimulationState.initial(u_o, rng=stream(2, 0))
    for _ in range(30):
        s = step_long_term(paper_net, s, np.zeros(20), noise)
    assert np.allclose(batch[0], s.x, atol=1e-13)


@settings(max_examples=40, deadline=None)
@given(st.integers(1, 8), st.integers(0, 2**31 - 1))
def test_state_stays_in_unit_box(n, seed):
    rng = np.random.default_rng(seed)
    net = random_network(rng, n, (0.0, 1.0 - 1e-6))
    s = SimulationState.initial(rng.uniform(0.05, 0.95, n), x0=rng.uniform(0, 1, n), rng=rng)
    noise = NoiseModel(0.05)
    for _ in range(30):
        s = step_long_term(net, s, rng.uniform(0, 0.1, n), noise)
        assert np.all(s.x >= 0) and np.all(s.x <= 1)


@settings(max_examples=40, deadline=None)
@given(st.integers(1, 8), st.integers(0, 2**31 - 1))
def test_steady_state_monotone(n, seed):
    rng = np.random.default_rng(seed)
    net = random_network(rng, n)
    u1 = rng.uniform(0, 1, n)
    u2 = u1 + rng.uniform(0, 0.5, n)
    assert np.all(steady_state(net, u2) >= steady_state(net, u1) - 1e-12)


@settings(max_examples=30, deadline=None)
@given(st.integers(1, 8), st.floats(0.05, 0.95), st.integers(0, 2**31 - 1))
def test_short_term_contraction(n, lam, seed):
    rng = np.random.default_rng(seed)
    net = random_network(rng, n, (lam, lam))
    u_o = rng.uniform(0.1, 0.9, n)
    target = steady_state(net, u_o)
    mu = u_o.copy()
    for _ in range(3):
        mu = step_short_term(net, mu, u_o, rng.uniform(0, 0.5, n))
    rho = spectral_radius(net.social)
    gap = np.max(np.abs(mu - target))
    for _ in range(20):
        mu = step_short_term(net, mu, u_o, np.zeros(n))
        new_gap = np.max(np.abs(mu - target))
        assert new_gap <= (rho + 1e-9) * gap + 1e-15
        gap = new_gap


@settings(max_examples=30, deadline=None)
@given(st.integers(1, 8), st.integers(1, 10), st.integers(0, 2**31 - 1))
def test_long_term_dominates_short_term(n, T, seed):
    rng = np.random.default_rng(seed)
    net = random_network(rng, n)
    u_o = rng.uniform(0.1, 0.5, n)
    nu = rng.uniform(0.001, 0.04, n)
    lo = steady_state(net, u_o)
    hi = steady_state(net, u_o + T * nu)
    assert np.all(hi >= lo - 1e-12) and np.any(hi > lo + 1e-12)

import json

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from nudgesim.errors import AssumptionOneViolated, DimensionMismatch, ZeroRow
from nudgesim.network import (
    NetworkRecipe,
    build_network,
    generate_modular,
    load_network,
    network_from_dict,
    save_network,
    unreachable_agents,
)
from oracles import transitive_unreachable


def test_symmetric_row():
    net = build_network([[2.0, 2.0], [1.0, 3.0]], [0.5, 0.5])
    assert np.allclose(net.weights[0], [0.5, 0.5])
    assert np.allclose(net.weights[1], [0.25, 0.75])


def test_all_stubborn_rejected():
    with pytest.raises(AssumptionOneViolated, match="Assumption 1 violated"):
        build_network([[1.0, 1.0], [1.0, 1.0]], [1.0, 1.0])


def test_two_cycle_reaches_open_agent():
    net = build_network([[0.0, 1.0], [1.0, 0.0]], [0.5, 1.0])
    assert net.n_agents == 2


def test_zero_row():
    with pytest.raises(ZeroRow) as err:
        build_network([[0.0, 0.0], [1.0, 0.0]], [0.5, 0.5])
    assert err.value.rows == [0]


def test_shape_and_range_errors():
    with pytest.raises(DimensionMismatch):
        build_network(np.ones((2, 3)), [0.5, 0.5])
    with pytest.raises(DimensionMismatch):
        build_network(np.eye(2), [0.5, 0.5, 0.5])
    with pytest.raises(ValueError):
        build_network(np.eye(2), [1.5, 0.5])
    with pytest.raises(ValueError):
        build_network([[-1.0, 2.0], [0.0, 1.0]], [0.5, 0.5])


def test_arrays_are_frozen():
    net = build_network(np.eye(2), [0.2, 0.3])
    with pytest.raises(ValueError):
        net.weights[0, 0] = 3.0


def test_isolated_clusters_give_identity():
    net = generate_modular(NetworkRecipe(n_agents=7, n_clusters=7, p_link=0.0, p_cross=0.0))
    assert np.array_equal(net.weights, np.eye(7))


def test_paper_recipe(paper_net):
    assert paper_net.n_agents == 20
    assert np.max(np.abs(paper_net.weights.sum(axis=1) - 1)) <= 1e-12
    assert np.all(paper_net.lam == 0.25)
    assert sorted(set(paper_net.cluster_of.tolist())) == list(range(7))


def test_generator_deterministic():
    r = NetworkRecipe(seed=11)
    a, b = generate_modular(r), generate_modular(r)
    assert a == b
    assert np.array_equal(a.weights, b.weights)
    assert generate_modular(NetworkRecipe(seed=12)) != a


def test_recipe_validation():
    with pytest.raises(ValueError):
        NetworkRecipe(p_link=1.5)
    with pytest.raises(ValueError):
        NetworkRecipe(n_agents=3, n_clusters=4)


def test_edges_match_positive_weights(two_agent):
    assert two_agent.edges == [(0, 1), (1, 0)]


def test_json_round_trip(tmp_path, paper_net):
    path = tmp_path / "net.json"
    save_network(paper_net, path)
    assert load_network(path) == paper_net
    assert network_from_dict(json.loads(path.read_text())) == paper_net
    with pytest.raises(ValueError):
        network_from_dict({"weights": [[1.0]]})


@settings(max_examples=200, deadline=None)
@given(st.integers(1, 6), st.integers(0, 2**31 - 1))
def test_reachability_matches_transitive_closure(n, seed):
    rng = np.random.default_rng(seed)
    w = (rng.random((n, n)) < 0.3).astype(float)
    lam = np.where(rng.random(n) < 0.6, 1.0, rng.uniform(0, 1, n))
    assert unreachable_agents(w, lam) == transitive_unreachable(w, lam)


@settings(max_examples=50, deadline=None)
@given(st.integers(1, 30), st.integers(0, 2**31 - 1))
def test_row_sums_after_build(n, seed):
    rng = np.random.default_rng(seed)
    w = rng.uniform(0, 1e3, (n, n)) * (rng.random((n, n)) < 0.5)
    np.fill_diagonal(w, rng.uniform(1e-3, 1e3, n))
    net = build_network(w, rng.uniform(0, 0.99, n))
    assert np.max(np.abs(net.weights.sum(axis=1) - 1)) <= 1e-12
    assert np.array_equal(net.weights > 0, w > 0)

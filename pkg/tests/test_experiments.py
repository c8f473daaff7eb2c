import json
from dataclasses import replace

import numpy as np
import pytest

from nudgesim import experiments as ex
from nudgesim.dynamics import steady_state, stream
from nudgesim.errors import ConfigError
from nudgesim.network import NetworkRecipe, generate_modular


def test_social_benefit_examples():
    assert ex.social_benefit(np.ones(20)) == 0.0
    assert ex.social_benefit(np.full(20, 0.5)) == pytest.approx(5.0)
    assert ex.social_benefit(np.zeros(4)) == 4.0


def test_bias_vector():
    assert ex.bias_vector("mixed", 4).tolist() == [0.2, 0.2, 0.8, 0.8]
    with pytest.raises(ValueError):
        ex.bias_vector("flat", 4)


def test_zero_budget_mpc_equals_open_loop():
    base = ex.Scenario(beta=0.0, T_sim=15, n_runs=1, master_seed=3)
    a = ex.run_closed_loop(replace(base, policy=ex.PolicySpec(kind="mpc", L=5)), 0).trajectory
    b = ex.run_closed_loop(base, 0).trajectory
    assert np.array_equal(a.x, b.x)
    assert np.array_equal(a.u_c, np.zeros_like(a.u_c))


class _Silent:
    """Noise stub: always zero."""

    def uniform(self, lo, hi, size=None):
        return np.zeros(size)


def test_noise_free_gamma_approaches_steady_state():
    net = generate_modular(NetworkRecipe())
    u_o = ex.bias_vector("mixed", net.n_agents)
    target = ex.social_benefit(steady_state(net, u_o))
    res = ex.simulate_closed_loop(net, u_o, 0.0, 0.025, 200, ex.PolicySpec(), _Silent(), x0=np.zeros(net.n_agents))
    g = res.trajectory.gamma
    assert np.all(np.diff(g) <= 1e-12)
    assert g[-1] == pytest.approx(target, abs=1e-9)


def test_trajectory_invariants_all_policies():
    for spec in (
        ex.PolicySpec(kind="constant", nu=(0.02,), T=10),
        ex.PolicySpec(kind="feedback", kappa=0.5, u_c_max=0.05),
        ex.PolicySpec(kind="ccp", T=10, R=10.0, S=1.0),
        ex.PolicySpec(kind="mpc", L=5),
    ):
        sc = ex.Scenario(beta=3.0, T_sim=20, n_runs=2, policy=spec)
        for r in ex.run_many(sc):
            assert ex.check_trajectory(r.trajectory, sc.beta, sc.delta) == []
            assert r.u_sigma_sim <= sc.beta + 1e-9


def test_run_many_independent_of_jobs():
    sc = ex.Scenario(T_sim=10, n_runs=4, policy=ex.PolicySpec(kind="mpc", L=3), master_seed=11)
    a = ex.run_many(sc, jobs=1)
    b = ex.run_many(sc, jobs=2)
    for r, s in zip(a, b):
        assert r.run_index == s.run_index
        assert np.array_equal(r.trajectory.x, s.trajectory.x)


def test_stream_matches_run():
    sc = ex.Scenario(T_sim=5, n_runs=3, master_seed=8)
    direct = ex.simulate_closed_loop(
        sc.network_for(2), sc.bias_for(20), sc.beta, sc.delta, sc.T_sim, sc.policy, stream(8, 2)
    )
    assert np.array_equal(direct.trajectory.x, ex.run_closed_loop(sc, 2).trajectory.x)


def test_scenario_round_trip():
    sc = ex.Scenario(
        bias="positive",
        beta=4.0,
        policy=ex.PolicySpec(kind="mpc", L=7, R=3.0, budget_constraint="total"),
        master_seed=5,
    )
    doc = json.loads(json.dumps(sc.to_dict()))
    assert ex.Scenario.from_dict(doc) == sc
    sc2 = ex.Scenario(custom_bias=(0.3,) * 20, policy=ex.PolicySpec(kind="constant", nu=(0.1,) * 20))
    assert ex.Scenario.from_dict(json.loads(json.dumps(sc2.to_dict()))) == sc2


@pytest.mark.parametrize(
    "doc",
    [
        {"policy": {"kind": "magic"}},
        {"bias": "flat"},
        {"T_sim": 0},
        {"beta": -1.0},
        {"colour": "red"},
        {"policy": {"kind": "mpc", "budget_constraint": "weekly"}},
    ],
)
def test_scenario_rejects(doc):
    with pytest.raises((ConfigError, ValueError)):
        ex.Scenario.from_dict(doc)


def test_validate_bias_above_envelope():
    sc = ex.Scenario(custom_bias=(0.99,) * 20)
    with pytest.raises(ConfigError):
        sc.validate()


def test_table_helpers(tmp_path):
    tab = ex.Table(["a", "b"], [["x", 1.5], ["y", 2.0]])
    assert tab.column("b") == [1.5, 2.0]
    assert tab.select(a="y") == [["y", 2.0]]
    tab.write(tmp_path / "t.csv")
    assert (tmp_path / "t.csv").read_text() == "a,b\nx,1.5\ny,2.0\n"


def test_mean_se():
    assert ex.mean_se([1.0]) == (1.0, 0.0)
    m, se = ex.mean_se([1.0, 3.0])
    assert m == 2.0 and se == pytest.approx(1.0)


def test_small_table2_shape():
    cfg = ex.ReproConfig(n_runs=2, T_sim=10)
    tab = ex.reproduce_table2(cfg)
    assert len(tab.rows) == 18
    assert all(r[-1] == "" for r in tab.rows)


def test_fig3_high_budget():
    trajs = ex.reproduce_fig3(ex.ReproConfig())
    assert set(trajs) == {"high", "mod", "low", "open_loop"}
    assert all(ok for _, ok in ex.fig3_checks(trajs))

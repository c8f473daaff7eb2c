import numpy as np
import pytest

from nudgesim.network import NetworkRecipe, build_network, generate_modular


@pytest.fixture
def two_agent():
    # P swaps the two agents, Lambda = 0.5 I
    return build_network([[0.0, 1.0], [1.0, 0.0]], [0.5, 0.5])


@pytest.fixture(scope="session")
def paper_net():
    return generate_modular(NetworkRecipe(seed=0))


def random_network(rng, n, lam_range=(0.0, 0.95)):
    """Random strongly-influenced network with self-loops (always valid)."""
    w = (rng.random((n, n)) < 0.5).astype(float) * rng.uniform(0.1, 1.0, (n, n))
    np.fill_diagonal(w, 1.0)
    lam = rng.uniform(*lam_range, size=n)
    return build_network(w, lam)


def pytest_terminal_summary(terminalreporter):
    import sys

    mod = sys.modules.get("test_acceptance")
    if mod is None or not mod.RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for line in mod.summary_lines():
        terminalreporter.write_line(line)

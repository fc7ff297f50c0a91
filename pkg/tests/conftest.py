import os
import sys

import pytest
from hypothesis import HealthCheck, settings

sys.path.insert(0, os.path.dirname(__file__))

settings.register_profile("repo", deadline=None, derandomize=True, max_examples=60,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile(os.environ.get("HYPOTHESIS_PROFILE", "repo"))

ACCEPTANCE_LINES = []
MC_BUILD_SECONDS = {}


@pytest.fixture(scope="session")
def acceptance_log():
    return ACCEPTANCE_LINES


@pytest.fixture(scope="session")
def mc_table():
    """Monte Carlo weights for every graph the star product (to second
    order) and the cocycle equation (n, m <= 2) need, 10^7 samples each."""
    import time

    from graphquant import checks
    from graphquant.starprod import cocycle_graphs, star_graphs
    from graphquant.weights import build_table

    graphs = [g for n in range(3) for g, _ in star_graphs(n)]
    for phi in checks.total_degree_two(2, 2):
        graphs.extend(cocycle_graphs(phi))
    start = time.perf_counter()
    table = build_table(graphs, samples=10 ** 7, seed=0)
    MC_BUILD_SECONDS["total"] = time.perf_counter() - start
    return table


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for _, line in sorted(ACCEPTANCE_LINES):
            terminalreporter.write_line(line)

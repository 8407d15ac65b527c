import os
import sys

import numpy as np
import pytest
from hypothesis import HealthCheck, settings

sys.path.insert(0, os.path.dirname(__file__))

settings.register_profile("default", deadline=None, max_examples=60,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")

from pareto_anneal.instance import Graph, MultiObjectiveInstance  # noqa: E402


def random_connected_graph(rng: np.random.Generator, n: int, extra: int) -> Graph:
    """Random spanning tree plus up to ``extra`` distinct chords."""
    edges = set()
    for v in range(1, n):
        u = int(rng.integers(v))
        edges.add((u, v))
    tries = 0
    while len(edges) < n - 1 + extra and tries < 50 * (extra + 1):
        u, v = sorted(int(x) for x in rng.choice(n, 2, replace=False))
        edges.add((u, v))
        tries += 1
    return Graph(n, tuple(sorted(edges)))


def random_instance(rng: np.random.Generator, n: int, m: int, extra: int = 2) -> MultiObjectiveInstance:
    g = random_connected_graph(rng, n, extra)
    return MultiObjectiveInstance(g, rng.standard_normal((g.num_edges, m)))


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


_ACCEPTANCE_ERRORS: dict[int, str] = {}


def pytest_runtest_logreport(report):
    name = report.nodeid.rsplit("::", 1)[-1]
    if "test_acceptance.py" in report.nodeid and name.startswith("test_criterion_") and report.failed:
        criterion = int(name.split("_")[2])
        _ACCEPTANCE_ERRORS.setdefault(criterion, str(report.longrepr).strip().splitlines()[-1])


def pytest_terminal_summary(terminalreporter):
    module = sys.modules.get("test_acceptance")
    results = dict(getattr(module, "RESULTS", None) or {})
    for criterion, message in _ACCEPTANCE_ERRORS.items():
        results.setdefault(criterion, (False, f"did not complete: {message}"))
    if not results:
        return
    terminalreporter.section("acceptance criteria")
    for criterion in sorted(results):
        ok, detail = results[criterion]
        terminalreporter.write_line(f"criterion {criterion}: {'PASS' if ok else 'FAIL'} - {detail}")

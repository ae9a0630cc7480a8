from __future__ import annotations

import random

import pytest
from hypothesis import HealthCheck, settings

from dynmatch.graph import DynamicGraph, edge

settings.register_profile(
    "repo", max_examples=60, deadline=None, suppress_health_check=[HealthCheck.too_slow]
)
settings.load_profile("repo")


def random_graph(n: int, m: int, seed: int) -> DynamicGraph:
    """Seeded G(n, m); ``m`` is capped at the number of vertex pairs."""
    rng = random.Random(seed)
    m = min(m, n * (n - 1) // 2)
    g = DynamicGraph(n)
    while g.edge_count < m:
        u, v = rng.sample(range(n), 2)
        if v not in g.adj[u]:
            g.add_edge(u, v)
    return g


@pytest.fixture
def k4() -> DynamicGraph:
    return DynamicGraph(4, [edge(u, v) for u in range(4) for v in range(u + 1, 4)])


ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split()[1].rstrip(":"))):
            terminalreporter.write_line(line)

from __future__ import annotations

import networkx as nx
import pytest
from hypothesis import given

from conftest import random_graph
from dynmatch.errors import WitnessMissing
from dynmatch.graph import DynamicGraph
from dynmatch.oracle import (
    check_damaged_edcs,
    check_edcs,
    check_matching,
    check_matching_preserving,
    effective_ratio,
    exhaustive_matching_size,
    max_matching_exact,
    mu,
)
from dynmatch.vertex_sparsify import Partitioning
from strategies import graphs


def test_small_examples(k4):
    assert mu(DynamicGraph(3, [(0, 1), (1, 2), (0, 2)])) == 1
    assert mu(DynamicGraph(4, [(0, 1), (1, 2), (2, 3)])) == 2
    assert mu(k4) == 2
    assert mu(DynamicGraph(0)) == 0


def test_blossom_needs_contraction():
    # a 5-cycle with a pendant: greedy from the wrong side gets stuck without blossoms
    g = DynamicGraph(6, [(0, 1), (1, 2), (2, 3), (3, 4), (0, 4), (4, 5)])
    assert mu(g) == 3


def test_seeded_n16_matches_enumeration():
    g = random_graph(16, 40, seed=7)
    assert mu(g) == exhaustive_matching_size(16, g.edges())


@given(graphs(max_n=11))
def test_blossom_agrees_with_enumeration(g):
    m = max_matching_exact(g)
    assert check_matching(g, m)
    assert len(m) == exhaustive_matching_size(g.n, g.edges())


@pytest.mark.parametrize("seed", range(20))
def test_blossom_agrees_with_networkx(seed):
    g = random_graph(60, 90 + 5 * seed, seed)
    ref = nx.Graph()
    ref.add_nodes_from(range(60))
    ref.add_edges_from(g.edges())
    assert mu(g) == len(nx.max_weight_matching(ref, maxcardinality=True))


def test_check_matching_examples():
    g = DynamicGraph(3, [(0, 1), (1, 2)])
    assert check_matching(g, set())
    assert not check_matching(g, {(0, 1), (1, 2)})
    assert not check_matching(DynamicGraph(3, [(1, 2)]), {(0, 1)})


def test_edcs_checker_examples(k4):
    assert check_damaged_edcs(k4, k4.edges(), 6, 0.25, 0, witness=()).valid
    rep = check_damaged_edcs(k4, (), 4, 0.25, 0, witness=())
    assert not rep.valid
    assert len(rep.by_clause("c")) == 6
    assert check_edcs(k4, k4.edges(), 6, 0.25).valid


def test_edcs_checker_clauses(k4):
    rep = check_damaged_edcs(k4, k4.edges(), 5, 0.25, 0.25, witness={0, 1})
    assert {v.clause for v in rep.violations} == {"a", "b"}
    assert "violations=" in rep.to_text()
    with pytest.raises(WitnessMissing):
        check_damaged_edcs(k4, (), 4, 0.25, 0)
    fallback = check_damaged_edcs(k4, (), 4, 0.25, 1, fallback=True)
    assert not fallback.by_clause("c")


def test_matching_preserving_trivial_families():
    g = DynamicGraph(6, [(0, 1), (2, 3), (4, 5)])
    planted = g.edges()
    assert check_matching_preserving(g, [Partitioning.identity(6)], planted, 0)
    assert not check_matching_preserving(g, [Partitioning.single(6)], planted, 0.5)


def test_effective_ratio():
    assert effective_ratio(10, 5) == 2.0
    assert effective_ratio(10, 5, delta=0.5, n=4) == 1.6
    assert effective_ratio(3, 0) == float("inf")
    assert effective_ratio(0, 0) == 0.0

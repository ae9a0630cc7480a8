from __future__ import annotations

import random
from fractions import Fraction as F

import pytest
from hypothesis import given, settings, strategies as st

from conftest import random_graph
from dynmatch.edcs import (
    DamagedEdcs,
    EdcsParams,
    dyn_delete,
    dyn_init,
    dyn_insert,
    dyn_witness,
    iteration_bound,
    potential,
    set_batch,
    static_build,
)
from dynmatch.errors import BatchOrder, DegenerateParams
from dynmatch.graph import DynamicGraph, Insert, edge
from dynmatch.journal import Journal
from dynmatch.oracle import check_damaged_edcs
from dynmatch.streams import erdos_renyi_dynamic

# beta*lam/16 = 2: each vertex gets at most one guarded H-insert per phase
STEPWISE = EdcsParams.of(64, F(1, 2), F(1, 2))


def test_params_validation():
    with pytest.raises(ValueError):
        EdcsParams.of(1, 0.5, 0.5)
    with pytest.raises(ValueError):
        EdcsParams.of(8, 0, 0.5)
    with pytest.raises(ValueError):
        EdcsParams.of(8, 0.5, 1)
    p = EdcsParams.of(64, F(1, 2), F(1, 2))
    assert not p.satisfies_strict
    assert p.rebuild_params() == (F(64) / F(9, 8), F(1, 8), F(1, 4))
    assert p.churn_threshold == 2


def test_empty_graph_build():
    res = static_build(DynamicGraph(5), 8, F(1, 4), F(1, 4))
    assert res.h == set() and res.witness == set()
    assert res.stats.iterations == 1 and res.stats.converged


def test_single_edge_cycles_at_beta_two():
    # the edge enters at degree 0 and leaves at degree 2 > 2(1 - 1/8); the
    # repeat is detected, the final add pass marks both endpoints damaged
    res = static_build(DynamicGraph(2, [(0, 1)]), 2, F(1, 2), 1)
    assert res.stats.cycle_detected and not res.stats.converged
    assert res.h == set() and res.witness == {0, 1}
    assert check_damaged_edcs(DynamicGraph(2, [(0, 1)]), res.h, 2, F(1, 2), 1, res.witness).valid


def test_small_beta_lambda_cycles_and_overflows_witness():
    g = random_graph(100, 600, seed=0)
    res = static_build(g, 8, F(1, 4), F(1, 4))
    assert res.stats.cycle_detected
    rep = check_damaged_edcs(g, res.h, 8, F(1, 4), F(1, 4), res.witness)
    assert [v.clause for v in rep.violations] == ["a"]


@pytest.mark.parametrize("seed", range(5))
def test_converging_regime_is_valid(seed):
    g = random_graph(100, 600, seed)
    res = static_build(g, 32, F(1, 4), F(1, 4))
    assert res.stats.converged
    assert check_damaged_edcs(g, res.h, 32, F(1, 4), F(1, 4), res.witness).valid
    assert res.stats.iterations <= iteration_bound(F(1, 4), F(1, 4))


def test_iteration_bound_example():
    assert iteration_bound(F(1, 2), F(1, 2)) == 129
    for seed in range(5):
        g = random_graph(60, 400, seed)
        assert static_build(g, 16, F(1, 2), F(1, 2)).stats.iterations <= 129


@pytest.mark.parametrize("seed", range(3))
def test_phi_trace_increases_when_converging(seed):
    g = random_graph(50, 300, seed)
    res = static_build(g, 32, F(1, 4), F(1, 4))
    trace = res.stats.phi_trace
    assert res.stats.converged
    assert all(b > a for a, b in zip(trace, trace[1:]))
    assert len(res.stats.gains()) == len(trace)


@given(st.integers(0, 10_000))
@settings(max_examples=25)
def test_phi_gain_formula(seed):
    """Adding an edge with endpoint degrees a, b raises Phi by 2 beta - 3 - 2(a + b)."""
    rng = random.Random(seed)
    n, beta = 12, F(10)
    h: set = set()
    for _ in range(20):
        u, v = rng.sample(range(n), 2)
        e = edge(u, v)
        if e in h:
            continue
        a = sum(u in x for x in h)
        b = sum(v in x for x in h)
        before = potential(n, h, beta)
        h.add(e)
        assert potential(n, h, beta) - before == 2 * beta - 3 - 2 * (a + b)


def test_degenerate_params():
    g = DynamicGraph(64)
    p = EdcsParams.of(16, F(1, 4), F(1, 4))
    assert p.rebuild_period(64) == 1
    with pytest.raises(DegenerateParams):
        dyn_init(g, p)
    DamagedEdcs(g, p, allow_degenerate=True)


def test_dynamic_examples():
    g = DynamicGraph(100)
    st_ = dyn_init(g, STEPWISE)
    assert st_.sparsifier() == set()
    assert dyn_witness(st_) == set(st_.base_witness) == set()
    g.apply(Insert(0, 1))
    dyn_insert(st_, (0, 1))
    assert (0, 1) in st_.sparsifier()
    g.remove_edge(0, 1)
    out = dyn_delete(st_, (0, 1))
    assert (0, 1) not in st_.sparsifier() and (0, 1) in st_.e_d
    assert [str(c) for c in out.changes] == ["- 0 1"]


def test_insert_blocked_at_beta_minus_one():
    p = EdcsParams.of(8, F(1, 2), F(1, 2))
    # a star where 0 has H-degree 4 and 9 has H-degree 3 -> deg_H(0, 9) = 7 = beta - 1
    g = DynamicGraph(400, [(0, i) for i in range(1, 5)] + [(9, i) for i in range(10, 13)])
    s = DamagedEdcs(g, p, allow_degenerate=True)
    assert s.h.degree(0) + s.h.degree(9) == 7
    g.add_edge(0, 9)
    s.insert((0, 9))
    assert (0, 9) in s.e_i and (0, 9) not in s.sparsifier()


def test_witness_after_deletions_at_vertex():
    g = random_graph(100, 600, seed=1)
    s = DamagedEdcs(g, STEPWISE)
    v = min(x for x in range(100) if x not in s.witness() and len(g.adj[x]) >= 2)
    for u in sorted(g.adj[v])[:2]:  # beta*lam/16 = 2 deletions
        assert v not in s.witness()
        g.remove_edge(u, v)
        s.delete(edge(u, v))
    assert v in s.witness()


def test_rebuild_after_alpha_updates_matches_static():
    g = DynamicGraph(100)
    s = DamagedEdcs(g, STEPWISE)
    events = erdos_renyi_dynamic(100, s.alpha, seed=4)
    for i, ev in enumerate(events, start=1):
        g.apply(ev)
        out = s.update(ev)
        assert out.rebuilt == (i == s.alpha)
    ref = static_build(g, *STEPWISE.rebuild_params())
    assert s.sparsifier() == ref.h
    assert s.witness() == ref.witness


def test_batch_thresholds():
    g = DynamicGraph(100)
    s = DamagedEdcs(g, STEPWISE, k=4)
    assert s.alpha == 25
    set_batch(s, 1)
    assert s.threshold == 6
    set_batch(s, 4)
    assert s.threshold == 25
    with pytest.raises(BatchOrder):
        set_batch(s, 2)
    for i in range(1, 5):
        assert i * s.alpha // 4 <= s.alpha


@pytest.mark.parametrize("k", [1, 4])
@pytest.mark.parametrize("seed", range(3))
def test_stepwise_validity(seed, k):
    n = 100
    g = DynamicGraph(n)
    s = DamagedEdcs(g, STEPWISE, k=k)
    events = erdos_renyi_dynamic(n, 500, seed)
    for step, ev in enumerate(events):
        if k > 1:
            i = step * k // len(events) + 1
            if i != s.batch_index:
                s.set_batch(i)
        g.apply(ev)
        s.update(ev)
        rep = check_damaged_edcs(g, s.sparsifier(), STEPWISE.beta, STEPWISE.lam, STEPWISE.delta, s.witness())
        assert rep.valid, (step, rep.to_text())


def test_literal_guard_counterexample():
    """Comparing the post-count churn degree against beta*lam/16 - 1 leaves a gap.

    With beta*lam/16 = 2 the literal guard refuses an edge whose endpoint has
    E_I-degree 1 after counting it, but that endpoint is not yet in the
    witness, so an uncovered low-degree edge stays outside H.
    """
    lit = EdcsParams.of(64, F(1, 2), F(1, 2), literal_guard=True)
    g = DynamicGraph(100)
    s = DamagedEdcs(g, lit)
    g.add_edge(0, 1)
    s.insert((0, 1))
    rep = check_damaged_edcs(g, s.sparsifier(), lit.beta, lit.lam, lit.delta, s.witness())
    assert rep.by_clause("c")

    g2 = DynamicGraph(100)
    s2 = DamagedEdcs(g2, STEPWISE)
    g2.add_edge(0, 1)
    s2.insert((0, 1))
    assert check_damaged_edcs(g2, s2.sparsifier(), 64, F(1, 2), F(1, 2), s2.witness()).valid


def test_journal_rollback_restores_state():
    j = Journal()
    g = DynamicGraph(100, journal=j)
    s = DamagedEdcs(g, STEPWISE, journal=j)
    events = erdos_renyi_dynamic(100, 80, seed=9)
    for ev in events[:30]:
        g.apply(ev)
        s.update(ev)
    mark = j.mark()
    before = (s.sparsifier(), s.witness(), s.since_rebuild, s.rebuilds, set(s.e_i), set(s.e_d))
    for ev in events[30:]:
        g.apply(ev)
        s.update(ev)
    assert s.rebuilds > 0
    j.rollback(mark)
    after = (s.sparsifier(), s.witness(), s.since_rebuild, s.rebuilds, set(s.e_i), set(s.e_d))
    assert after == before


def test_dump_format():
    g = DynamicGraph(100, [(0, 1)])
    s = DamagedEdcs(g, STEPWISE)
    text = s.dump()
    assert text.splitlines()[0] == "100"
    assert text.rstrip().splitlines()[-1].startswith("D:")

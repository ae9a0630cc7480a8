from __future__ import annotations

import random
from fractions import Fraction as F

import pytest
from hypothesis import given, strategies as st

from conftest import random_graph
from dynmatch.errors import BadWeights, BatchOrder, DuplicateEdge, MissingEdge
from dynmatch.graph import DynamicGraph, edge
from dynmatch.uniform import (
    FractionalMatching,
    UniformSparsifier,
    check_uniform,
    degree_split,
    gen_uniform_fm,
    level_count,
    set_batch_us,
    static_uniform_sparsify,
    us_delete,
    us_insert,
)
from strategies import edge_sets


def _degrees(edges) -> dict[int, int]:
    d: dict[int, int] = {}
    for u, v in edges:
        d[u] = d.get(u, 0) + 1
        d[v] = d.get(v, 0) + 1
    return d


def test_degree_split_examples():
    assert degree_split([]) == set()
    assert degree_split([(0, 1)]) == set()
    assert degree_split([(0, 1), (1, 2), (2, 3)]) == {(1, 2)}
    assert degree_split([(0, 1), (1, 2), (2, 3), (0, 3)]) == {(1, 2), (0, 3)}


@given(edge_sets(max_n=14))
def test_degree_split_halves_degrees(sample):
    _, edges = sample
    out = degree_split(edges)
    assert out <= set(edges)
    din, dout = _degrees(edges), _degrees(out)
    for v, d in din.items():
        assert abs(dout.get(v, 0) - F(d, 2)) <= 1


def test_degree_split_deterministic():
    edges = sorted(random_graph(30, 90, seed=4).edges())
    shuffled = edges[:]
    random.Random(1).shuffle(shuffled)
    assert degree_split(edges) == degree_split(shuffled)


@pytest.mark.parametrize("lam,beta,L", [(F(1, 2), 1, 0), (F(1, 4), 1, 1), (F(1, 16), 1, 3), (F(3, 16), 1, 2)])
def test_level_count(lam, beta, L):
    assert level_count(lam, beta) == L
    assert F(beta, 2) <= lam * 2**L < beta


def test_level_count_rejects_bad_range():
    with pytest.raises(BadWeights):
        level_count(1, 1)
    with pytest.raises(BadWeights):
        level_count(0, 1)


def test_half_beta_returns_input():
    g = random_graph(20, 30, seed=0)
    fm = gen_uniform_fm(g, F(1, 4), seed=0)
    us = static_uniform_sparsify(DynamicGraph(20, fm.edges()), F(1, 4), F(1, 2), F(1, 4))
    assert us.L == 0
    assert us.output() == {e: F(1, 4) for e in fm.edges()}


def test_quarter_beta_has_one_split_level():
    us = UniformSparsifier(6, [(0, 1), (2, 3)], F(1, 4), 1, F(1, 2))
    assert us.L == 1 and len(us.levels) == 2


def test_fractional_matching_validation():
    FractionalMatching({(0, 1): F(1, 2), (1, 2): F(1, 2)})
    with pytest.raises(BadWeights):
        FractionalMatching({(0, 1): F(3, 4), (1, 2): F(1, 2)})
    with pytest.raises(BadWeights):
        FractionalMatching({(0, 1): F(3, 2)})
    with pytest.raises(BadWeights):
        UniformSparsifier(4, [(0, 1), (0, 2), (0, 3)], F(1, 2), 1, F(1, 4))


def test_gen_uniform_fm_examples():
    g = random_graph(20, 50, seed=3)
    fm = gen_uniform_fm(g, 1, seed=3)
    assert set(fm.weights.values()) == {1}
    used = {x for e in fm.weights for x in e}
    assert all(u in used or v in used for u, v in g.edges())  # maximal
    path = DynamicGraph(6, [(i, i + 1) for i in range(5)])
    assert set(gen_uniform_fm(path, F(1, 2)).edges()) == path.edge_set()


@pytest.mark.parametrize("seed", range(100))
def test_gen_uniform_fm_vertex_weights(seed):
    g = random_graph(25, 80, seed)
    lam = F(1, random.Random(seed).randint(1, 6))
    fm = gen_uniform_fm(g, lam, seed)
    assert all(fm.vertex_weight(v) <= 1 for v in range(25))
    assert all(w == lam for w in fm.weights.values())


def _hundred_edges() -> list:
    rng = random.Random(0)
    out: set = set()
    while len(out) < 100:
        u, v = rng.sample(range(40), 2)
        out.add(edge(u, v))
    return sorted(out)


def test_pending_guard_example():
    us = UniformSparsifier(40, _hundred_edges(), F(1, 64), 1, F(1, 5), k=4)
    set_batch_us(us, 1)
    free = [edge(u, v) for u in range(40) for v in range(u + 1, 40) if edge(u, v) not in us.active]
    for e in free[:5]:
        assert not us_insert(us, e)
    assert len(us.pending) == 5
    assert us_insert(us, free[5])
    assert us.pending == set() and len(us.active) == 106
    assert us.full_rebuilds == 2


def test_delete_pending_edge_touches_no_level():
    us = UniformSparsifier(40, _hundred_edges(), F(1, 64), 1, F(1, 5))
    before = [lv.deleted.copy() for lv in us.levels]
    us_insert(us, (38, 39)) if (38, 39) not in us.active else None
    assert (38, 39) in us.pending
    assert not us_delete(us, (38, 39))
    assert us.pending == set()
    assert [lv.deleted for lv in us.levels] == before


def test_unknown_and_duplicate_edges():
    us = UniformSparsifier(10, [(0, 1)], F(1, 4), 1, F(1, 4))
    with pytest.raises(MissingEdge):
        us_delete(us, (2, 3))
    with pytest.raises(DuplicateEdge):
        us_insert(us, (1, 0))


def test_batch_widening():
    us = UniformSparsifier(40, _hundred_edges(), F(1, 64), 1, F(1, 5), k=4)
    slacks = []
    for i in range(1, 5):
        set_batch_us(us, i)
        slacks.append(us.slack)
    assert slacks == sorted(set(slacks))
    assert slacks[-1] == us.eps
    with pytest.raises(BatchOrder):
        set_batch_us(us, 2)
    with pytest.raises(ValueError):
        set_batch_us(us, 5)


def test_breached_deletion_buffer_is_emptied():
    us = UniformSparsifier(40, _hundred_edges(), F(1, 64), 1, F(1, 5))
    for e in sorted(us.active)[:40]:
        if us_delete(us, e) and us.last_rebuild is not None:
            assert us.levels[us.last_rebuild].deleted == set()
    assert us.partial_rebuilds + us.full_rebuilds > 1


def _trace(seed: int, k: int, steps: int = 500):
    rng = random.Random(seed)
    n, lam, beta, eps = 40, F(1, 8), 1, F(1, 4)
    g = random_graph(n, 120, seed)
    fm = gen_uniform_fm(g, lam, seed)
    us = UniformSparsifier(n, fm.edges(), lam, beta, eps, k=k)
    yield us
    for step in range(steps):
        if k > 1:
            i = step * k // steps + 1
            if i != us.batch:
                us.set_batch(i)
        live = sorted(us.support())
        if live and rng.random() < 0.5:
            us.delete(rng.choice(live))
        else:
            for _ in range(50):
                u, v = rng.sample(range(n), 2)
                e = edge(u, v)
                if e not in us.support() and us.load[u] < us.cap and us.load[v] < us.cap:
                    us.insert(e)
                    break
        yield us


@pytest.mark.parametrize("k", [1, 4])
@pytest.mark.parametrize("seed", range(3))
def test_trace_invariants(seed, k):
    for us in _trace(seed, k):
        rep = check_uniform(us)
        assert rep.exact_ok, us.dump()
        assert us.output().keys() <= us.active


def test_dump_lists_every_level():
    us = UniformSparsifier(10, [(0, 1)], F(1, 8), 1, F(1, 4))
    assert len(us.dump().splitlines()) == 2 + us.L + 1

"""End-to-end dynamic matching pipelines built from the library pieces.

Every pipeline owns the live graph and exposes the same small surface:
``update(ev) -> bool`` (True when a rebuild happened), ``matching()`` and
``graph``.  Work is counted by the library, so wrapping an ``update`` call in a
:class:`work.Meter` gives that step's cost.
"""

from __future__ import annotations

import statistics
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Iterable, Sequence

from . import work
from .edcs import DamagedEdcs, EdcsParams
from .graph import DynamicGraph, Edge, UpdateEvent
from .journal import Journal
from .matcher import LazyMatcher
from .oracle import mates_to_matching, max_matching_mates
from .rational import Number, frac
from .scheduler import BatchScheduler, JournaledAlgorithm, SnapshotAdapter, UnionGraph, smallest_k
from .uniform import UniformSparsifier
from .vertex_sparsify import FamilySource, VertexSparsifier, random_family_source


def batch_of(step: int, total: int, k: int) -> int:
    """Batch index (1..k) of ``step`` when ``total`` steps are cut into k near-equal runs."""
    if total <= 0:
        return 1
    return min(k, step * k // total + 1)


class EdcsMatcher:
    """Damaged EDCS of a graph plus a lazily maintained matching inside it.

    The graph belongs to the caller, who applies each update before calling
    :meth:`update`.
    """

    def __init__(
        self,
        g: DynamicGraph,
        params: EdcsParams,
        eps: Number,
        k: int = 1,
        *,
        allow_degenerate: bool = False,
        journal: Journal | None = None,
    ) -> None:
        self.g = g
        self.edcs = DamagedEdcs(g, params, k, allow_degenerate=allow_degenerate)
        self.hview = DynamicGraph(g.n, self.edcs.h.edges())
        self.matcher = LazyMatcher(self.hview, eps, delta_cap=int(params.beta))
        self.attach(journal)

    def attach(self, journal: Journal | None) -> None:
        self.edcs.attach(journal)
        self.hview.journal = journal
        self.matcher.journal = journal

    def set_batch(self, i: int) -> None:
        self.edcs.set_batch(i)

    def update(self, ev: UpdateEvent) -> bool:
        out = self.edcs.update(ev)
        if out.rebuilt:
            for ch in out.changes:
                self.hview.apply(ch)
            self.matcher.rebuild()
            return True
        rebuilt = False
        for ch in out.changes:
            self.hview.apply(ch)
            rebuilt |= self.matcher.apply(ch)
        return rebuilt

    def matching(self) -> set[Edge]:
        return self.matcher.matching()

    def sparsifier(self) -> set[Edge]:
        return self.edcs.sparsifier()


# ---------------------------------------------------------------------------
# Amortized pipelines
# ---------------------------------------------------------------------------

class DamagedEdcsPipeline:
    """Damaged EDCS plus matcher on the live graph; batch mode when ``k > 1``."""

    def __init__(
        self,
        n: int,
        params: EdcsParams,
        eps: Number,
        k: int = 1,
        *,
        total_steps: int = 0,
        allow_degenerate: bool = False,
    ) -> None:
        self.graph = DynamicGraph(n)
        self.k = k
        self.total_steps = total_steps
        self.steps = 0
        self.inner = EdcsMatcher(self.graph, params, eps, k, allow_degenerate=allow_degenerate)

    @property
    def params(self) -> EdcsParams:
        return self.inner.edcs.params

    def update(self, ev: UpdateEvent) -> bool:
        if self.k > 1:
            i = batch_of(self.steps, self.total_steps, self.k)
            if i != self.inner.edcs.batch_index:
                self.inner.set_batch(i)
        self.steps += 1
        self.graph.apply(ev)
        return self.inner.update(ev)

    def matching(self) -> set[Edge]:
        return self.inner.matching()

    def sparsifier(self) -> set[Edge]:
        return self.inner.sparsifier()

    def witness(self) -> set[int]:
        return self.inner.edcs.witness()


class GreedyUniformSupport:
    """A lambda-uniform fractional matching kept greedily under graph updates.

    An inserted edge joins the support when both endpoints have room below
    floor(1/lam); a deleted support edge simply leaves it.
    """

    def __init__(self, n: int, lam: Fraction) -> None:
        self.cap = int(1 / lam)
        self.load = [0] * n
        self.edges: set[Edge] = set()

    def update(self, ev: UpdateEvent) -> UpdateEvent | None:
        u, v = ev.edge
        work.tick()
        if ev.is_insert:
            if self.load[u] < self.cap and self.load[v] < self.cap:
                self.load[u] += 1
                self.load[v] += 1
                self.edges.add(ev.edge)
                return ev
            return None
        if ev.edge in self.edges:
            self.edges.discard(ev.edge)
            self.load[u] -= 1
            self.load[v] -= 1
            return ev
        return None


class UniformPipeline:
    """Greedy uniform support feeding the level-structure sparsifier.

    ``matching()`` is an exact maximum matching of the sparsifier's support,
    which stands in for the integral matcher that would run on it.
    """

    def __init__(
        self,
        n: int,
        lam: Number,
        beta: Number,
        eps: Number,
        k: int = 1,
        *,
        total_steps: int = 0,
    ) -> None:
        self.graph = DynamicGraph(n)
        self.lam = frac(lam)
        self.k = k
        self.total_steps = total_steps
        self.steps = 0
        self.support = GreedyUniformSupport(n, self.lam)
        self.sparsifier = UniformSparsifier(n, (), self.lam, beta, eps, k)

    def update(self, ev: UpdateEvent) -> bool:
        if self.k > 1:
            i = batch_of(self.steps, self.total_steps, self.k)
            if i != self.sparsifier.batch:
                self.sparsifier.set_batch(i)
        self.steps += 1
        self.graph.apply(ev)
        fev = self.support.update(ev)
        if fev is None:
            return False
        return self.sparsifier.update(fev)

    def matching(self) -> set[Edge]:
        out = sorted(self.sparsifier.output())
        return mates_to_matching(max_matching_mates(self.graph.n, out))


# ---------------------------------------------------------------------------
# Scheduler instances and the worst-case pipeline
# ---------------------------------------------------------------------------

class EdcsInstance(JournaledAlgorithm):
    """One scheduler slot: a private copy of the graph and its damaged EDCS.

    Passing ``eps`` adds a matcher inside the sparsifier; its output is then
    the matching instead of the sparsifier's edge set.
    """

    def __init__(
        self,
        n: int,
        params: EdcsParams,
        k: int,
        *,
        eps: Number | None = None,
        allow_degenerate: bool = False,
    ) -> None:
        super().__init__()
        self.graph = DynamicGraph(n, journal=self.journal)
        if eps is None:
            self.edcs: DamagedEdcs | None = DamagedEdcs(
                self.graph, params, k, allow_degenerate=allow_degenerate, journal=self.journal
            )
            self.inner: EdcsMatcher | None = None
        else:
            self.inner = EdcsMatcher(
                self.graph, params, eps, k, allow_degenerate=allow_degenerate, journal=self.journal
            )
            self.edcs = self.inner.edcs

    def on_batch(self, index: int) -> None:
        self.edcs.set_batch(index)

    def process(self, ev: UpdateEvent) -> None:
        self.graph.apply(ev)
        if self.inner is not None:
            self.inner.update(ev)
        else:
            self.edcs.update(ev)

    def output(self) -> frozenset[Edge]:
        if self.inner is not None:
            return frozenset(self.inner.matching())
        return frozenset(self.edcs.sparsifier())


class WorstCasePipeline:
    """k scheduled damaged-EDCS matchers, their matchings unioned, matched again.

    Each slot keeps the last output it produced while fresh; stale edges
    are filtered against the live graph, so the union stays a subgraph of G
    with maximum degree at most k.
    """

    def __init__(
        self,
        n: int,
        params: EdcsParams,
        eps: Number,
        k: int,
        *,
        allow_degenerate: bool = False,
    ) -> None:
        self.graph = DynamicGraph(n)
        self.eps = frac(eps)
        self.scheduler = BatchScheduler(
            k, lambda: EdcsInstance(n, params, k, eps=eps, allow_degenerate=allow_degenerate)
        )
        self.held: list[frozenset[Edge]] = [frozenset()] * k
        self.union = UnionGraph(n)
        self.matcher = LazyMatcher(self.union.graph, self.eps, delta_cap=k)

    def update(self, ev: UpdateEvent) -> bool:
        self.graph.apply(ev)
        fresh = self.scheduler.step(ev)
        for i, out in fresh.items():
            self.held[i] = out
        rebuilt = False
        for ch in self.union.sync(list(self.held), self.graph):
            rebuilt |= self.matcher.apply(ch)
        # edges deleted from G but still held are gone from the union view already
        return rebuilt

    def matching(self) -> set[Edge]:
        return self.matcher.matching()


class UniformSnapshotState:
    """Uniform sparsifier packaged for :class:`SnapshotAdapter`."""

    def __init__(self, n: int, lam: Number, beta: Number, eps: Number, k: int) -> None:
        self.support = GreedyUniformSupport(n, frac(lam))
        self.sparsifier = UniformSparsifier(n, (), lam, beta, eps, k)

    def set_batch(self, i: int) -> None:
        self.sparsifier.set_batch(i)

    def apply(self, ev: UpdateEvent) -> None:
        fev = self.support.update(ev)
        if fev is not None:
            self.sparsifier.update(fev)

    def output(self) -> frozenset[Edge]:
        return frozenset(self.sparsifier.output())


# ---------------------------------------------------------------------------
# Vertex-sparsified matcher
# ---------------------------------------------------------------------------

class ReducedMatcher:
    """Damaged-EDCS matchers on concatenations of G, unioned and matched again."""

    def __init__(
        self,
        g: DynamicGraph,
        params: EdcsParams,
        eps: Number,
        C: Number,
        L: int,
        *,
        alpha: Number = Fraction(3, 2),
        inner_eps: Number | None = None,
        seed: int = 0,
        source: FamilySource | None = None,
    ) -> None:
        self.graph = g
        self.eps = frac(eps)
        self.alpha = frac(alpha)
        top_eps = self.eps / (8 * self.alpha)
        inner_eps = top_eps if inner_eps is None else frac(inner_eps)
        if source is None:
            source = random_family_source(g.n, self.eps, self.alpha, C, L, seed)

        def inner(h: DynamicGraph, _delta: Fraction) -> EdcsMatcher:
            return EdcsMatcher(h, params, inner_eps, allow_degenerate=True)

        self.sparsifier = VertexSparsifier(g, inner, source, self.eps, self.alpha, C,
                                           inner_delta=params.delta)
        self.sparsifier.drain()
        self.matcher = LazyMatcher(self.sparsifier.union, top_eps)

    def update(self, ev: UpdateEvent) -> bool:
        """Propagate one update already applied to the graph."""
        rebuilt = False
        for ch in self.sparsifier.update(ev):
            rebuilt |= self.matcher.apply(ch)
        return rebuilt

    def matching(self) -> set[Edge]:
        return self.matcher.matching()


# ---------------------------------------------------------------------------
# Work profiles
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class WorkSummary:
    steps: int
    total: int
    max: int
    median: float
    batch_totals: tuple[int, ...]

    @property
    def ratio(self) -> float:
        return self.max / self.median if self.median else float(self.max)


def summarize(per_step: Sequence[int], k: int = 1) -> WorkSummary:
    if not per_step:
        return WorkSummary(0, 0, 0, 0.0, ())
    totals = [0] * k
    for s, w in enumerate(per_step):
        totals[batch_of(s, len(per_step), k) - 1] += w
    return WorkSummary(len(per_step), sum(per_step), max(per_step),
                       float(statistics.median(per_step)), tuple(totals))


def amortized_profile(n: int, events: Iterable[UpdateEvent], params: EdcsParams) -> list[int]:
    """Per-step work of a single damaged EDCS on the live graph."""
    g = DynamicGraph(n)
    edcs = DamagedEdcs(g, params)
    out = []
    for ev in events:
        with work.Meter() as m:
            g.apply(ev)
            edcs.update(ev)
        out.append(m.units)
    return out


def scheduled_profile(
    n: int,
    events: Sequence[UpdateEvent],
    params: EdcsParams,
    k: int | None = None,
    factory: Callable[[], object] | None = None,
) -> list[int]:
    """Per-step work charged by the scheduler across its k damaged-EDCS slots."""
    if k is None:
        k = smallest_k(len(events))
    if factory is None:
        def factory() -> EdcsInstance:
            return EdcsInstance(n, params, k)
    sched = BatchScheduler(k, factory)
    out = []
    for ev in events:
        sched.step(ev)
        out.append(sum(sched.last_work))
    return out


def uniform_scheduled_profile(
    n: int, events: Sequence[UpdateEvent], lam: Number, beta: Number, eps: Number, k: int | None = None
) -> list[int]:
    if k is None:
        k = smallest_k(len(events))
    sched = BatchScheduler(k, lambda: SnapshotAdapter(UniformSnapshotState(n, lam, beta, eps, k)))
    out = []
    for ev in events:
        sched.step(ev)
        out.append(sum(sched.last_work))
    return out


__all__ = [
    "DamagedEdcsPipeline",
    "EdcsInstance",
    "EdcsMatcher",
    "ReducedMatcher",
    "UniformPipeline",
    "WorkSummary",
    "WorstCasePipeline",
    "amortized_profile",
    "batch_of",
    "scheduled_profile",
    "summarize",
]

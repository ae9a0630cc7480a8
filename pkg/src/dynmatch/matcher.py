"""Approximate matching inside a small, bounded-degree host graph.

The static routine removes every augmenting path (blossom search from each
free vertex), so in particular none of length <= 2*ceil(1/eps) - 1 survives.
The dynamic wrapper patches the matching lazily and recomputes it once the
number of updates since the last rebuild exceeds floor(eps * last_size).
"""

from __future__ import annotations

import math
from fractions import Fraction

from . import work
from .graph import DynamicGraph, Edge, UpdateEvent
from .journal import Journal
from .oracle import augment_from, mates_to_matching
from .rational import Number, frac


def augmenting_length(eps: Number) -> int:
    return 2 * math.ceil(1 / frac(eps)) - 1


def _approx_mates(h: DynamicGraph) -> list[int]:
    n = h.n
    adj = [sorted(a) for a in h.adj]
    mate = [-1] * n
    work.tick(n + 2 * h.edge_count)
    for u in range(n):
        if mate[u] == -1:
            for v in adj[u]:
                if mate[v] == -1:
                    mate[u], mate[v] = v, u
                    break
    for r in range(n):
        if mate[r] == -1 and adj[r]:
            work.tick(n + 2 * h.edge_count)
            augment_from(adj, mate, r)
    return mate


def static_approx_matching(h: DynamicGraph, eps: Number) -> set[Edge]:
    """A matching of ``h`` with no augmenting path of length <= 2*ceil(1/eps) - 1."""
    if frac(eps) <= 0:
        raise ValueError("eps must be positive")
    return mates_to_matching(_approx_mates(h))


def has_short_augmenting_path(h: DynamicGraph, m: set[Edge], max_len: int) -> bool:
    """Exhaustive search for an augmenting path with at most ``max_len`` edges.

    Explores simple alternating paths from every free vertex; exponential in
    ``max_len`` and meant for small test graphs.
    """
    mate = [-1] * h.n
    for u, v in m:
        mate[u], mate[v] = v, u

    def extend(v: int, length: int, on_path: set[int]) -> bool:
        # v was reached by an unmatched edge; the path so far has `length` edges
        if mate[v] == -1:
            return True
        if length + 2 > max_len:
            return False
        w = mate[v]
        if w in on_path:
            return False
        on_path.add(v)
        on_path.add(w)
        for x in h.adj[w]:
            if x not in on_path and x != mate[w]:
                if extend(x, length + 2, on_path):
                    return True
        on_path.discard(v)
        on_path.discard(w)
        return False

    for r in range(h.n):
        if mate[r] != -1:
            continue
        for x in h.adj[r]:
            if extend(x, 1, {r}):
                return True
    return False


class LazyMatcher:
    """Matching of a host graph kept valid under the host's updates.

    Call :meth:`apply` after the event has been applied to ``host``.  With a
    journal attached every change is logged so batches can be undone.
    """

    def __init__(
        self,
        host: DynamicGraph,
        eps: Number,
        delta_cap: int | None = None,
        *,
        journal: Journal | None = None,
    ) -> None:
        self.host = host
        self.eps: Fraction = frac(eps)
        if self.eps <= 0:
            raise ValueError("eps must be positive")
        self.delta_cap = delta_cap
        self.journal = None
        self.mate = _approx_mates(host)
        self.size = sum(1 for u, v in enumerate(self.mate) if v > u)
        self.last_size = self.size
        self.since_rebuild = 0
        self.rebuilds = 0
        self.journal = journal

    @property
    def period(self) -> int:
        return math.floor(self.eps * self.last_size)

    def _save(self) -> None:
        if self.journal is not None:
            snap = (self.size, self.last_size, self.since_rebuild, self.rebuilds)

            def undo() -> None:
                self.size, self.last_size, self.since_rebuild, self.rebuilds = snap

            self.journal.record(undo)

    def _pair(self, u: int, w: int) -> None:
        mate = self.mate
        if self.journal is not None:
            old_u, old_w = mate[u], mate[w]

            def undo() -> None:
                mate[u], mate[w] = old_u, old_w

            self.journal.record(undo)
        mate[u], mate[w] = w, u

    def _unpair(self, u: int, v: int) -> None:
        mate = self.mate
        if self.journal is not None:
            def undo() -> None:
                mate[u], mate[v] = v, u

            self.journal.record(undo)
        mate[u] = mate[v] = -1

    def rebuild(self) -> None:
        if self.journal is not None:
            old = self.mate

            def undo() -> None:
                self.mate = old

            self.journal.record(undo)
        self.mate = _approx_mates(self.host)
        self.size = sum(1 for u, v in enumerate(self.mate) if v > u)
        self.last_size = self.size
        self.since_rebuild = 0
        self.rebuilds += 1

    def _try_match(self, u: int) -> None:
        if self.mate[u] != -1:
            return
        for w in sorted(self.host.adj[u]):
            work.tick()
            if self.mate[w] == -1:
                self._pair(u, w)
                self.size += 1
                return

    def apply(self, ev: UpdateEvent) -> bool:
        """Process one host update; returns True if it triggered a rebuild."""
        u, v = ev.edge
        work.tick(2)
        self._save()
        if ev.is_insert:
            if self.mate[u] == -1 and self.mate[v] == -1:
                self._pair(u, v)
                self.size += 1
        elif self.mate[u] == v:
            self._unpair(u, v)
            self.size -= 1
            self._try_match(u)
            self._try_match(v)
        self.since_rebuild += 1
        if self.since_rebuild > self.period:
            self.rebuild()
            return True
        return False

    def matching(self) -> set[Edge]:
        return mates_to_matching(self.mate)

    def __len__(self) -> int:
        return self.size


def matcher_apply(state: LazyMatcher, host: DynamicGraph, ev: UpdateEvent) -> bool:
    if state.host is not host:
        raise ValueError("matcher is bound to a different host graph")
    return state.apply(ev)

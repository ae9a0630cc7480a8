"""Damaged EDCS: a near-linear static construction and an amortized-rebuild dynamic version.

A damaged EDCS relaxes the usual edge-degree constrained subgraph by letting
the lower-bound clause fail on edges that touch a small witness set of
"damaged" vertices.  The static builder alternates add and remove passes and
stops once an add pass touches few edges; the dynamic structure patches the
sparsifier locally and rebuilds from scratch every ``alpha`` updates.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, NamedTuple

from . import work
from .errors import BatchOrder, DegenerateParams
from .graph import DynamicGraph, Edge, Kind, UpdateEvent
from .journal import Journal
from .rational import Number, frac


@dataclass(frozen=True)
class EdcsParams:
    """Sparsifier parameters.

    ``strict`` enforces the hypotheses under which the (3/2 + eps, delta)
    approximation is guaranteed: eps < 1/2, lam <= eps/32 and
    beta >= 8 lam^-2 ln(1/lam).  ``literal_guard`` selects the alternative
    reading of the insertion guard (see :meth:`DamagedEdcs.insert`).
    """

    beta: Fraction
    lam: Fraction
    delta: Fraction
    strict: bool = False
    eps: Fraction | None = None
    literal_guard: bool = False

    def __post_init__(self) -> None:
        for name in ("beta", "lam", "delta"):
            object.__setattr__(self, name, frac(getattr(self, name)))
        if self.eps is not None:
            object.__setattr__(self, "eps", frac(self.eps))
        if self.beta < 2:
            raise ValueError(f"beta must be >= 2, got {self.beta}")
        if not 0 < self.lam < 1:
            raise ValueError(f"lambda must lie in (0, 1), got {self.lam}")
        if not 0 < self.delta < 1:
            raise ValueError(f"delta must lie in (0, 1), got {self.delta}")
        if self.strict:
            problems = self.strict_violations()
            if problems:
                raise ValueError("strict parameters violated: " + "; ".join(problems))

    @classmethod
    def of(cls, beta: Number, lam: Number, delta: Number, **kw) -> "EdcsParams":
        return cls(frac(beta), frac(lam), frac(delta), **kw)

    def strict_violations(self) -> list[str]:
        out = []
        eps = self.eps
        if eps is None:
            return ["strict mode needs eps"]
        if not eps < Fraction(1, 2):
            out.append(f"eps={eps} not < 1/2")
        if self.lam > eps / 32:
            out.append(f"lambda={self.lam} > eps/32={eps / 32}")
        need = 8 / float(self.lam) ** 2 * math.log(1 / float(self.lam))
        if float(self.beta) < need:
            out.append(f"beta={self.beta} < 8 lambda^-2 ln(1/lambda)={need:.1f}")
        return out

    @property
    def satisfies_strict(self) -> bool:
        return self.eps is not None and not self.strict_violations()

    def rebuild_period(self, n: int) -> int:
        return math.floor(n * self.delta * self.lam * self.beta / 64)

    @property
    def churn_threshold(self) -> Fraction:
        """E_I / E_D degree at which a vertex joins the dynamic witness."""
        return self.beta * self.lam / 16

    def rebuild_params(self) -> tuple[Fraction, Fraction, Fraction]:
        q = self.lam / 4
        return self.beta / (1 + q), q, self.delta / 2


# ---------------------------------------------------------------------------
# Static construction
# ---------------------------------------------------------------------------

@dataclass
class BuildStats:
    iterations: int = 0
    converged: bool = True
    cycle_detected: bool = False
    phi_trace: list[Fraction] = field(default_factory=list)
    edges_added_per_iteration: list[int] = field(default_factory=list)
    edges_removed_per_iteration: list[int] = field(default_factory=list)

    def gains(self) -> list[Fraction]:
        """Per-iteration change of the potential, starting from Phi(empty) = 0."""
        prev = Fraction(0)
        out = []
        for phi in self.phi_trace:
            out.append(phi - prev)
            prev = phi
        return out


class BuildResult(NamedTuple):
    h: set[Edge]
    witness: set[int]
    stats: BuildStats


def potential(n: int, h: Iterable[Edge], beta: Number) -> Fraction:
    """|H| (2 beta - 1) - sum over H edges of their H edge-degree."""
    beta = frac(beta)
    deg = [0] * n
    size = 0
    for u, v in h:
        deg[u] += 1
        deg[v] += 1
        size += 1
    return size * (2 * beta - 1) - sum(d * d for d in deg)


def iteration_bound(lam: Number, delta: Number) -> int:
    lam, delta = frac(lam), frac(delta)
    return math.ceil(16 / (lam * lam * delta)) + 1


def static_build(
    g: DynamicGraph,
    beta: Number,
    lam: Number,
    delta: Number,
    *,
    max_iterations: int | None = None,
) -> BuildResult:
    """Build a (beta, lam, delta)-damaged EDCS of ``g``.

    Edges are visited in sorted order.  An add pass walks a snapshot of
    E \\ H taken at pass start and reads H-degrees live, so edges added
    earlier in the pass count against later ones.

    When beta*lam is small an added edge can land above the removal
    threshold and the add/remove passes may cycle.  The loop is
    deterministic, so a repeated H after a remove pass proves it will never
    stop; that, or reaching ``max_iterations`` (default: the
    potential-based bound), makes the next add pass final regardless of its
    size and sets ``stats.converged`` to False.  Such a result is not
    guaranteed to pass the checker.
    """
    beta, lam, delta = frac(beta), frac(lam), frac(delta)
    n = g.n
    edges = g.edges()
    add_below = beta * (1 - lam / 2)
    drop_above = beta * (1 - lam / 4)
    stop_at = delta * lam * beta * n / 16
    damage_above = lam * beta / 8

    # integer forms of the strict thresholds
    add_max = math.ceil(add_below) - 1
    drop_min = math.floor(drop_above) + 1

    m = len(edges)
    deg = [0] * n
    in_h = bytearray(m)
    size = 0
    sq = 0  # sum of squared H-degrees; Phi = size*(2 beta - 1) - sq
    stats = BuildStats()
    cap = iteration_bound(lam, delta) if max_iterations is None else max_iterations
    seen: set[bytes] = set()
    repeated = False

    while True:
        stats.iterations += 1
        added: list[int] = []
        snapshot = [i for i in range(m) if not in_h[i]]
        work.tick(m + 3 * len(snapshot))
        for i in snapshot:
            u, v = edges[i]
            d = deg[u] + deg[v]
            if d <= add_max:
                sq += 2 * d + 2
                deg[u] += 1
                deg[v] += 1
                in_h[i] = 1
                added.append(i)
        size += len(added)
        stats.edges_added_per_iteration.append(len(added))

        if len(added) > stop_at and (repeated or stats.iterations >= cap):
            stats.converged = False
            stats.cycle_detected = repeated
        if len(added) <= stop_at or not stats.converged:
            stats.phi_trace.append(size * (2 * beta - 1) - sq)
            stats.edges_removed_per_iteration.append(0)
            added_deg: dict[int, int] = {}
            for i in added:
                u, v = edges[i]
                added_deg[u] = added_deg.get(u, 0) + 1
                added_deg[v] = added_deg.get(v, 0) + 1
            witness = {v for v, d in added_deg.items() if d > damage_above}
            work.tick(len(added))
            for i in added:
                u, v = edges[i]
                if u in witness or v in witness:
                    in_h[i] = 0
            h = {edges[i] for i in range(m) if in_h[i]}
            return BuildResult(h, witness, stats)

        removed = 0
        work.tick(3 * size)
        for i in range(m):
            if in_h[i]:
                u, v = edges[i]
                d = deg[u] + deg[v]
                if d >= drop_min:
                    sq -= 2 * d - 2
                    deg[u] -= 1
                    deg[v] -= 1
                    in_h[i] = 0
                    removed += 1
        size -= removed
        stats.edges_removed_per_iteration.append(removed)
        stats.phi_trace.append(size * (2 * beta - 1) - sq)
        key = bytes(in_h)
        repeated = key in seen
        seen.add(key)


# ---------------------------------------------------------------------------
# Dynamic maintenance
# ---------------------------------------------------------------------------

class Outcome(NamedTuple):
    """Sparsifier changes caused by one update."""

    changes: list[UpdateEvent]
    rebuilt: bool


def _diff(old: DynamicGraph, new: DynamicGraph) -> list[UpdateEvent]:
    a, b = old.edge_set(), new.edge_set()
    work.tick(len(a) + len(b))
    out = [UpdateEvent(Kind.DELETE, e) for e in sorted(a - b)]
    out.extend(UpdateEvent(Kind.INSERT, e) for e in sorted(b - a))
    return out


class DamagedEdcs:
    """Dynamic (beta, lam, delta)-damaged EDCS over a caller-owned graph.

    The caller applies each update to ``g`` first and then calls
    :meth:`insert` or :meth:`delete`.  With a journal attached, every state
    change is logged so the owner can roll back whole batches.
    """

    def __init__(
        self,
        g: DynamicGraph,
        params: EdcsParams,
        k: int = 1,
        *,
        allow_degenerate: bool = False,
        journal: Journal | None = None,
    ) -> None:
        if k < 1:
            raise ValueError("k must be >= 1")
        self.g = g
        self.params = params
        self.k = k
        self.alpha = params.rebuild_period(g.n)
        self.allow_degenerate = allow_degenerate
        if self.alpha // k <= 1 and not allow_degenerate:
            raise DegenerateParams(
                f"rebuild period floor(n*delta*lambda*beta/64)={self.alpha} with k={k} "
                "forces a rebuild after every update"
            )
        self.journal: Journal | None = None
        self.batch_index: int | None = None
        self.since_rebuild = 0
        self.rebuilds = 0
        self.h = DynamicGraph(g.n)
        self.e_i: set[Edge] = set()
        self.e_d: set[Edge] = set()
        self.deg_i: dict[int, int] = {}
        self.deg_d: dict[int, int] = {}
        self.base_witness: frozenset[int] = frozenset()
        self.last_stats: BuildStats | None = None
        self.rebuild()
        self.rebuilds = 0
        self.attach(journal)

    def attach(self, journal: Journal | None) -> None:
        self.journal = journal
        self.h.journal = journal

    # -- journaled helpers ------------------------------------------------
    def _set(self, name: str, value) -> None:
        if self.journal is not None:
            old = getattr(self, name)
            self.journal.record(lambda: setattr(self, name, old))
        setattr(self, name, value)

    def _bump(self, table: dict[int, int], v: int) -> None:
        old = table.get(v, 0)
        table[v] = old + 1
        work.tick()
        if self.journal is not None:
            if old:
                self.journal.record(lambda: table.__setitem__(v, old))
            else:
                self.journal.record(lambda: table.pop(v))

    def _add_to(self, s: set[Edge], e: Edge) -> bool:
        work.tick()
        if e in s:
            return False
        s.add(e)
        if self.journal is not None:
            self.journal.record(lambda: s.discard(e))
        return True

    # -- thresholds -------------------------------------------------------
    @property
    def threshold(self) -> int:
        if self.batch_index is None:
            return self.alpha
        return self.batch_index * self.alpha // self.k

    def set_batch(self, i: int) -> None:
        if not 1 <= i <= self.k:
            raise ValueError(f"batch index {i} outside [1, {self.k}]")
        if self.batch_index is not None and i < self.batch_index:
            raise BatchOrder(f"batch index decreased from {self.batch_index} to {i}")
        self._set("batch_index", i)

    # -- rebuild ----------------------------------------------------------
    def rebuild(self) -> list[UpdateEvent]:
        beta, lam, delta = self.params.rebuild_params()
        res = static_build(self.g, beta, lam, delta)
        new_h = DynamicGraph(self.g.n, sorted(res.h), journal=self.journal)
        changes = _diff(self.h, new_h)
        if self.journal is not None:
            saved = (self.h, self.e_i, self.e_d, self.deg_i, self.deg_d,
                     self.base_witness, self.since_rebuild, self.last_stats, self.rebuilds)

            def restore() -> None:
                (self.h, self.e_i, self.e_d, self.deg_i, self.deg_d,
                 self.base_witness, self.since_rebuild, self.last_stats, self.rebuilds) = saved

            self.journal.record(restore)
        self.h = new_h
        self.e_i, self.e_d = set(), set()
        self.deg_i, self.deg_d = {}, {}
        self.base_witness = frozenset(res.witness)
        self.since_rebuild = 0
        self.last_stats = res.stats
        self.rebuilds += 1
        return changes

    def _tick_update(self, changes: list[UpdateEvent]) -> Outcome:
        self._set("since_rebuild", self.since_rebuild + 1)
        if self.since_rebuild >= self.threshold:
            # the diff is taken against H after this update's own change
            return Outcome(changes + self.rebuild(), True)
        return Outcome(changes, False)

    # -- updates ----------------------------------------------------------
    def insert(self, e: Edge) -> Outcome:
        """Record an inserted edge and add it to H when the local guard allows.

        The guard compares E_I-degrees against beta*lam/16 - 1 *before* ``e``
        is counted, which is the same as comparing the degrees after
        counting ``e`` against beta*lam/16.  Under that reading an edge left
        out of H always has an endpoint in the witness or a high H-degree.
        ``literal_guard`` compares the post-count degrees against
        beta*lam/16 - 1 instead.
        """
        u, v = e
        if self._add_to(self.e_i, e):
            self._bump(self.deg_i, u)
            self._bump(self.deg_i, v)
        cap = self.params.churn_threshold
        if self.params.literal_guard:
            cap -= 1
        changes: list[UpdateEvent] = []
        busiest = max(self.deg_i.get(u, 0), self.deg_i.get(v, 0))
        if busiest < cap and not self.h.has_edge(u, v):
            if self.h.degree(u) + self.h.degree(v) <= self.params.beta - 2:
                self.h.add_edge(u, v)
                changes.append(UpdateEvent(Kind.INSERT, e))
        return self._tick_update(changes)

    def delete(self, e: Edge) -> Outcome:
        u, v = e
        if self._add_to(self.e_d, e):
            self._bump(self.deg_d, u)
            self._bump(self.deg_d, v)
        changes: list[UpdateEvent] = []
        if self.h.has_edge(u, v):
            self.h.remove_edge(u, v)
            changes.append(UpdateEvent(Kind.DELETE, e))
        return self._tick_update(changes)

    def update(self, ev: UpdateEvent) -> Outcome:
        return self.insert(ev.edge) if ev.is_insert else self.delete(ev.edge)

    # -- outputs ----------------------------------------------------------
    def witness(self) -> set[int]:
        t = self.params.churn_threshold
        out = set(self.base_witness)
        out.update(v for v, d in self.deg_i.items() if d >= t)
        out.update(v for v, d in self.deg_d.items() if d >= t)
        return out

    def sparsifier(self) -> set[Edge]:
        return self.h.edge_set()

    def dump(self) -> str:
        """Sparsifier in stream format followed by a witness line."""
        lines = [str(self.g.n)]
        lines.extend(f"+ {u} {v}" for u, v in self.h.edges())
        lines.append("D: " + " ".join(str(v) for v in sorted(self.witness())))
        return "\n".join(lines) + "\n"


def dyn_init(g: DynamicGraph, params: EdcsParams, k: int = 1, **kw) -> DamagedEdcs:
    return DamagedEdcs(g, params, k, **kw)


def dyn_insert(state: DamagedEdcs, e: Edge) -> Outcome:
    return state.insert(e)


def dyn_delete(state: DamagedEdcs, e: Edge) -> Outcome:
    return state.delete(e)


def dyn_witness(state: DamagedEdcs) -> set[int]:
    return state.witness()


def set_batch(state: DamagedEdcs, i: int) -> None:
    state.set_batch(i)

"""Vertex-set sparsification: quotient graphs under vertex partitionings.

A partitioning maps every vertex to one of ``d`` parts; the concatenation of
G under it has one vertex per part and an edge between two parts whenever some
edge of G joins them.  A family of partitionings is (k, eps)-matching
preserving when every size-k matching of G keeps at least (1 - eps) k edges in
the concatenation under some member.  Families come from random sampling or
from the neighbour lists of a left-regular bipartite expander.
"""

from __future__ import annotations

import enum
import itertools
import math
import random
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Iterable, Sequence

from . import work
from .errors import NotLeftRegular, ParseError, TooLarge
from .graph import DynamicGraph, Edge, Kind, UpdateEvent, edge
from .rational import Number, frac


@dataclass(frozen=True)
class Partitioning:
    part_of: tuple[int, ...]
    d: int

    def __post_init__(self) -> None:
        object.__setattr__(self, "part_of", tuple(self.part_of))
        for v, p in enumerate(self.part_of):
            if not 0 <= p < self.d:
                raise ValueError(f"vertex {v} mapped to part {p} outside [0, {self.d})")

    @property
    def n(self) -> int:
        return len(self.part_of)

    @classmethod
    def identity(cls, n: int) -> "Partitioning":
        return cls(tuple(range(n)), max(n, 1))

    @classmethod
    def single(cls, n: int) -> "Partitioning":
        return cls((0,) * n, 1)

    def unique_parts(self, vertices: Iterable[int]) -> set[int]:
        """Vertices of the given set that share their part with no other vertex of it."""
        vs = list(vertices)
        count: dict[int, int] = {}
        for v in vs:
            count[self.part_of[v]] = count.get(self.part_of[v], 0) + 1
        return {v for v in vs if count[self.part_of[v]] == 1}


class FamilyKind(enum.Enum):
    RANDOM = "random"
    EXPANDER = "expander"
    EXPLICIT = "explicit"


@dataclass(frozen=True)
class PartitioningFamily:
    members: tuple[Partitioning, ...]
    kind: FamilyKind
    k: int
    eps: Fraction

    def __post_init__(self) -> None:
        ds = {p.d for p in self.members}
        ns = {p.n for p in self.members}
        if len(ds) > 1 or len(ns) > 1:
            raise ValueError("family members must share the part count and vertex universe")

    def __iter__(self):
        return iter(self.members)

    def __len__(self) -> int:
        return len(self.members)

    @property
    def d(self) -> int:
        return self.members[0].d if self.members else 0


def family_size(n: int, eps: Number, const: Number = 512) -> int:
    """ceil(const * ln(n) / eps^2), at least 1."""
    eps = frac(eps)
    return max(1, math.ceil(float(frac(const)) * math.log(max(n, 2)) / float(eps * eps)))


def part_count(k: int, eps: Number) -> int:
    return math.ceil(8 * k / frac(eps))


def gen_random_family(
    n: int,
    k: int,
    eps: Number,
    L: int | None = None,
    seed: int = 0,
    *,
    const: Number = 512,
    d: int | None = None,
) -> PartitioningFamily:
    """L partitionings assigning each vertex uniformly to one of ceil(8k/eps) parts."""
    if k < 1:
        raise ValueError("k must be >= 1")
    eps = frac(eps)
    if not 0 < eps < 1:
        raise ValueError("eps must lie in (0, 1)")
    parts = part_count(k, eps) if d is None else d
    size = family_size(n, eps, const) if L is None else L
    rng = random.Random(seed)
    members = tuple(
        Partitioning(tuple(rng.randrange(parts) for _ in range(n)), parts) for _ in range(size)
    )
    return PartitioningFamily(members, FamilyKind.RANDOM, k, eps)


# ---------------------------------------------------------------------------
# Expanders
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class BipartiteExpander:
    """Left-regular bipartite graph; ``neighbors[v][i]`` is v's i-th neighbour."""

    n_left: int
    n_right: int
    d: int
    neighbors: tuple[tuple[int, ...], ...]

    def __post_init__(self) -> None:
        rows = tuple(tuple(r) for r in self.neighbors)
        object.__setattr__(self, "neighbors", rows)
        if len(rows) != self.n_left:
            raise NotLeftRegular(f"expected {self.n_left} rows, got {len(rows)}")
        for v, row in enumerate(rows):
            if len(row) != self.d or len(set(row)) != self.d:
                raise NotLeftRegular(f"left vertex {v} does not have exactly {self.d} distinct neighbours")
            for r in row:
                if not 0 <= r < self.n_right:
                    raise ValueError(f"right vertex {r} outside [0, {self.n_right})")


def random_expander(n_left: int, n_right: int, d: int, seed: int = 0) -> BipartiteExpander:
    rng = random.Random(seed)
    rows = tuple(tuple(rng.sample(range(n_right), d)) for _ in range(n_left))
    return BipartiteExpander(n_left, n_right, d, rows)


def parse_expander(text: str) -> BipartiteExpander:
    lines = [(i, ln.strip()) for i, ln in enumerate(text.splitlines(), start=1)]
    lines = [(i, ln) for i, ln in lines if ln and not ln.startswith("#")]
    if not lines:
        raise ParseError(1, "empty expander file")
    head_no, head = lines[0]
    try:
        n_left, n_right, d = (int(x) for x in head.split())
    except ValueError:
        raise ParseError(head_no, f"expected 'n_left n_right d', got {head!r}") from None
    rows = []
    for lineno, ln in lines[1:]:
        try:
            rows.append(tuple(int(x) for x in ln.split()))
        except ValueError:
            raise ParseError(lineno, f"non-integer neighbour id in {ln!r}") from None
    return BipartiteExpander(n_left, n_right, d, tuple(rows))


def format_expander(exp: BipartiteExpander) -> str:
    out = [f"{exp.n_left} {exp.n_right} {exp.d}"]
    out.extend(" ".join(str(r) for r in row) for row in exp.neighbors)
    return "\n".join(out) + "\n"


def subset_count(n: int, k: int) -> int:
    return sum(math.comb(n, s) for s in range(1, min(k, n) + 1))


def verify_expander(exp: BipartiteExpander, k: int, eps: Number, *, budget: int = 2_000_000) -> bool:
    """True iff every left set S with |S| <= k has |N(S)| >= (1 - eps) d |S|."""
    eps = frac(eps)
    if subset_count(exp.n_left, k) > budget:
        raise TooLarge(f"{subset_count(exp.n_left, k)} subsets exceed the budget of {budget}")
    masks = [sum(1 << r for r in row) for row in exp.neighbors]
    need = (1 - eps) * exp.d
    for s in range(1, min(k, exp.n_left) + 1):
        floor_s = need * s
        for combo in itertools.combinations(masks, s):
            acc = 0
            for m in combo:
                acc |= m
            if acc.bit_count() < floor_s:
                return False
    return True


def family_from_expander(exp: BipartiteExpander, k: int = 0, eps: Number = 0) -> PartitioningFamily:
    """The i-th member sends vertex v to its i-th expander neighbour."""
    if any(len(row) != exp.d for row in exp.neighbors):
        raise NotLeftRegular("expander is not left-regular")
    members = tuple(
        Partitioning(tuple(row[i] for row in exp.neighbors), exp.n_right) for i in range(exp.d)
    )
    return PartitioningFamily(members, FamilyKind.EXPANDER, k, frac(eps))


# ---------------------------------------------------------------------------
# Concatenation
# ---------------------------------------------------------------------------

class ConcatenatedGraph:
    """Quotient of a base graph under a partitioning, kept in step with the base.

    ``multiplicity[(p, q)]`` counts base edges between parts p < q; edges
    inside one part are dropped.  ``preimages`` keeps those base edges so a
    matched part pair can be mapped back to a live base edge.
    """

    def __init__(self, base: DynamicGraph, partitioning: Partitioning) -> None:
        if partitioning.n != base.n:
            raise ValueError("partitioning and base graph disagree on the vertex count")
        self.base = base
        self.partitioning = partitioning
        self.multiplicity: dict[Edge, int] = {}
        self.preimages: dict[Edge, set[Edge]] = {}
        self.simple_view = DynamicGraph(partitioning.d)
        for e in base.edges():
            self._add(e)

    def pair(self, e: Edge) -> Edge | None:
        p, q = self.partitioning.part_of[e[0]], self.partitioning.part_of[e[1]]
        if p == q:
            return None
        return (p, q) if p < q else (q, p)

    def _add(self, e: Edge) -> UpdateEvent | None:
        pq = self.pair(e)
        work.tick()
        if pq is None:
            return None
        c = self.multiplicity.get(pq, 0)
        self.multiplicity[pq] = c + 1
        self.preimages.setdefault(pq, set()).add(e)
        if c == 0:
            self.simple_view.add_edge(*pq)
            return UpdateEvent(Kind.INSERT, pq)
        return None

    def _remove(self, e: Edge) -> UpdateEvent | None:
        pq = self.pair(e)
        work.tick()
        if pq is None:
            return None
        c = self.multiplicity[pq] - 1
        self.preimages[pq].discard(e)
        if c == 0:
            del self.multiplicity[pq]
            del self.preimages[pq]
            self.simple_view.remove_edge(*pq)
            return UpdateEvent(Kind.DELETE, pq)
        self.multiplicity[pq] = c
        return None

    def apply(self, ev: UpdateEvent) -> UpdateEvent | None:
        """Mirror one base update (already applied to the base graph)."""
        return self._add(ev.edge) if ev.is_insert else self._remove(ev.edge)

    def preimage(self, pq: Edge) -> Edge | None:
        """Canonically smallest live base edge behind a part pair."""
        pre = self.preimages.get(pq)
        if not pre:
            return None
        work.tick(len(pre))
        return min(pre)


def concat_maintain(cg: ConcatenatedGraph, ev: UpdateEvent) -> UpdateEvent | None:
    return cg.apply(ev)


def concatenation(g: DynamicGraph, part: Partitioning) -> DynamicGraph:
    return ConcatenatedGraph(g, part).simple_view


# ---------------------------------------------------------------------------
# Reduction driver
# ---------------------------------------------------------------------------

def level_sizes(n: int, eps: Number, alpha: Number) -> list[Fraction]:
    """Guesses of the matching size: (1 + eps/(8 alpha))^i for i >= 1 while the previous guess <= n."""
    step = 1 + frac(eps) / (8 * frac(alpha))
    size = Fraction(1)
    out = []
    while size <= n:
        size *= step
        out.append(size)
    return out


def level_count(n: int, eps: Number, alpha: Number) -> int:
    return len(level_sizes(n, eps, alpha))


FamilySource = Callable[[int, Fraction], Sequence[Partitioning]]
"""(level index, guessed matching size) -> partitionings for that level."""


def random_family_source(
    n: int, eps: Number, alpha: Number, C: Number, L: int, seed: int = 0
) -> FamilySource:
    """Random partitionings into ceil(C * size) parts (capped at n) per level."""
    C = frac(C)

    def source(level: int, size: Fraction) -> Sequence[Partitioning]:
        d = min(max(1, math.ceil(C * size)), max(n, 1))
        fam = gen_random_family(n, max(1, math.ceil(size)), frac(eps) / (8 * frac(alpha)),
                                L=L, seed=seed * 100_003 + level, d=d)
        return fam.members

    return source


class InnerMatcher:
    """What the reduction expects from an (alpha, delta)-approximate matcher.

    It is built on a graph it does not own; ``update`` is called after the
    graph already reflects the event.
    """

    def update(self, ev: UpdateEvent) -> None: ...

    def matching(self) -> set[Edge]: ...


InnerFactory = Callable[[DynamicGraph, Fraction], InnerMatcher]
"""(concatenated graph, delta) -> matcher."""


@dataclass
class Cell:
    level: int
    member: int
    graph: ConcatenatedGraph
    inner: InnerMatcher
    pulled: set[Edge]


class VertexSparsifier:
    """Run an inner matcher on every (level, partitioning) concatenation of G.

    Pulled-back matchings are unioned (with multiplicity) into ``union``;
    ``sync`` reports the union's changes so a bounded-degree matcher can
    follow them.
    """

    def __init__(
        self,
        g: DynamicGraph,
        inner: InnerFactory,
        source: FamilySource,
        eps: Number,
        alpha: Number,
        C: Number,
        *,
        inner_delta: Number | None = None,
    ) -> None:
        self.g = g
        self.eps = frac(eps)
        self.alpha = frac(alpha)
        self.C = frac(C)
        self.inner_delta = self.eps / (8 * self.C) if inner_delta is None else frac(inner_delta)
        self.sizes = level_sizes(g.n, self.eps, self.alpha)
        self.cells: list[Cell] = []
        self.union = DynamicGraph(g.n)
        self.count: dict[Edge, int] = {}
        for lvl, size in enumerate(self.sizes, start=1):
            for j, part in enumerate(source(lvl, size)):
                cg = ConcatenatedGraph(g, part)
                cell = Cell(lvl, j, cg, inner(cg.simple_view, self.inner_delta), set())
                self.cells.append(cell)
        self.pending: list[UpdateEvent] = []
        for cell in self.cells:
            self._refresh(cell)

    def _pull_back(self, cell: Cell) -> set[Edge]:
        out = set()
        for pq in cell.inner.matching():
            e = cell.graph.preimage(pq)
            if e is not None:
                out.add(e)
        return out

    def _refresh(self, cell: Cell) -> None:
        new = self._pull_back(cell)
        old = cell.pulled
        for e in old - new:
            c = self.count[e] - 1
            if c:
                self.count[e] = c
            else:
                del self.count[e]
                self.union.remove_edge(*e)
                self.pending.append(UpdateEvent(Kind.DELETE, e))
        for e in new - old:
            c = self.count.get(e, 0)
            self.count[e] = c + 1
            if not c:
                self.union.add_edge(*e)
                self.pending.append(UpdateEvent(Kind.INSERT, e))
        cell.pulled = new

    def update(self, ev: UpdateEvent) -> list[UpdateEvent]:
        """Propagate one base update (already applied to G); returns union changes."""
        for cell in self.cells:
            sev = cell.graph.apply(ev)
            if sev is not None:
                cell.inner.update(sev)
            if sev is not None or (not ev.is_insert and ev.edge in cell.pulled):
                self._refresh(cell)
        out, self.pending = self.pending, []
        return out

    def drain(self) -> list[UpdateEvent]:
        out, self.pending = self.pending, []
        return out

    def pulled_back(self) -> list[set[Edge]]:
        return [c.pulled for c in self.cells]


def reduce_to_alpha_eps(
    g: DynamicGraph,
    inner: InnerFactory,
    source: FamilySource,
    eps: Number,
    C: Number,
    L: int | None = None,
    *,
    alpha: Number = Fraction(3, 2),
    inner_delta: Number | None = None,
) -> "VertexSparsifier":
    del L  # the family source already fixes L
    return VertexSparsifier(g, inner, source, eps, alpha, C, inner_delta=inner_delta)


def planted_matching(n: int, k: int, rng: random.Random) -> list[Edge]:
    vs = rng.sample(range(n), 2 * k)
    return [edge(vs[2 * i], vs[2 * i + 1]) for i in range(k)]

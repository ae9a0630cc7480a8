"""Dynamic simple graph on a fixed vertex universe, plus the update-stream format.

Stream format::

    <n>
    + u v
    - u v
    # comment lines are ignored

Vertex ids are 0-based decimals below ``n``.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass
from typing import Iterable, Iterator, NamedTuple

from . import work
from .errors import DuplicateEdge, MissingEdge, ParseError, RangeError, SelfLoop
from .journal import Journal

Edge = tuple[int, int]


def edge(u: int, v: int) -> Edge:
    """Canonical (min, max) form of an undirected edge."""
    if u == v:
        raise SelfLoop(f"self-loop at vertex {u}")
    return (u, v) if u < v else (v, u)


class Kind(enum.Enum):
    INSERT = "+"
    DELETE = "-"


class UpdateEvent(NamedTuple):
    kind: Kind
    edge: Edge

    @classmethod
    def insert(cls, u: int, v: int) -> "UpdateEvent":
        return cls(Kind.INSERT, edge(u, v))

    @classmethod
    def delete(cls, u: int, v: int) -> "UpdateEvent":
        return cls(Kind.DELETE, edge(u, v))

    @property
    def is_insert(self) -> bool:
        return self.kind is Kind.INSERT

    def __str__(self) -> str:
        return f"{self.kind.value} {self.edge[0]} {self.edge[1]}"


Insert = UpdateEvent.insert
Delete = UpdateEvent.delete


class DynamicGraph:
    """Adjacency-set graph with degree counters.

    If a :class:`Journal` is attached, every mutation logs its inverse so the
    owner can roll the graph back.
    """

    __slots__ = ("n", "adj", "edge_count", "update_clock", "journal")

    def __init__(self, n: int, edges: Iterable[Edge] = (), journal: Journal | None = None) -> None:
        if n < 0:
            raise ValueError("vertex count must be non-negative")
        self.n = n
        self.adj: list[set[int]] = [set() for _ in range(n)]
        self.edge_count = 0
        self.update_clock = 0
        self.journal = None
        for u, v in edges:
            self.add_edge(u, v)
        self.journal = journal

    # -- queries ---------------------------------------------------------
    def degree(self, v: int) -> int:
        work.tick()
        return len(self.adj[v])

    def has_edge(self, u: int, v: int) -> bool:
        work.tick()
        return v in self.adj[u]

    def neighbors(self, v: int) -> set[int]:
        return self.adj[v]

    def edges(self) -> list[Edge]:
        """All edges in sorted canonical order."""
        out = [(u, v) for u in range(self.n) for v in self.adj[u] if u < v]
        out.sort()
        return out

    def edge_set(self) -> set[Edge]:
        return {(u, v) for u in range(self.n) for v in self.adj[u] if u < v}

    def max_degree(self) -> int:
        return max((len(a) for a in self.adj), default=0)

    def __contains__(self, e: Edge) -> bool:
        return e[1] in self.adj[e[0]]

    def __len__(self) -> int:
        return self.edge_count

    def __iter__(self) -> Iterator[Edge]:
        return iter(self.edges())

    # -- mutation --------------------------------------------------------
    def _check(self, u: int, v: int) -> None:
        if u == v:
            raise SelfLoop(f"self-loop at vertex {u}")
        for x in (u, v):
            if not 0 <= x < self.n:
                raise RangeError(f"vertex {x} outside [0, {self.n})")

    def add_edge(self, u: int, v: int) -> None:
        self._check(u, v)
        if v in self.adj[u]:
            raise DuplicateEdge(f"edge ({u}, {v}) already present")
        self.adj[u].add(v)
        self.adj[v].add(u)
        self.edge_count += 1
        work.tick(2)
        if self.journal is not None:
            self.journal.record(lambda: self._unlink(u, v))

    def remove_edge(self, u: int, v: int) -> None:
        self._check(u, v)
        if v not in self.adj[u]:
            raise MissingEdge(f"edge ({u}, {v}) not present")
        self._unlink(u, v)
        work.tick(2)
        if self.journal is not None:
            self.journal.record(lambda: self._link(u, v))

    def _link(self, u: int, v: int) -> None:
        self.adj[u].add(v)
        self.adj[v].add(u)
        self.edge_count += 1

    def _unlink(self, u: int, v: int) -> None:
        self.adj[u].discard(v)
        self.adj[v].discard(u)
        self.edge_count -= 1

    def apply(self, ev: UpdateEvent) -> None:
        u, v = ev.edge
        if ev.kind is Kind.INSERT:
            self.add_edge(u, v)
        else:
            self.remove_edge(u, v)
        self.update_clock += 1
        if self.journal is not None:
            self.journal.record(self._unclock)

    def _unclock(self) -> None:
        self.update_clock -= 1

    def copy(self) -> "DynamicGraph":
        g = DynamicGraph(self.n)
        g.adj = [set(a) for a in self.adj]
        g.edge_count = self.edge_count
        g.update_clock = self.update_clock
        return g

    def same_structure(self, other: "DynamicGraph") -> bool:
        return self.n == other.n and self.adj == other.adj

    def __repr__(self) -> str:
        return f"DynamicGraph(n={self.n}, m={self.edge_count})"


def apply_update(g: DynamicGraph, ev: UpdateEvent) -> None:
    g.apply(ev)


def edge_degree(g: DynamicGraph, e: Edge) -> int:
    """deg(u) + deg(v); the edge itself need not be present."""
    u, v = e
    return g.degree(u) + g.degree(v)


@dataclass(frozen=True)
class Stream:
    n: int
    events: list[UpdateEvent]


def parse_stream(text: str) -> Stream:
    """Parse a stream file into its vertex count and ordered events.

    Raises :class:`ParseError` on malformed lines (self-loops included) and
    :class:`RangeError` on vertex ids outside ``[0, n)``.  Both carry the
    offending line number.
    """
    lines = text.splitlines()
    n: int | None = None
    events: list[UpdateEvent] = []
    for lineno, raw in enumerate(lines, start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        if n is None:
            try:
                n = int(line)
            except ValueError:
                raise ParseError(lineno, f"expected vertex count, got {line!r}") from None
            if n < 0:
                raise ParseError(lineno, "vertex count must be non-negative")
            continue
        parts = line.split(" ")
        if len(parts) != 3 or parts[0] not in ("+", "-"):
            raise ParseError(lineno, f"expected '+ u v' or '- u v', got {line!r}")
        try:
            u, v = int(parts[1]), int(parts[2])
        except ValueError:
            raise ParseError(lineno, f"non-integer vertex id in {line!r}") from None
        if u < 0 or v < 0 or u >= n or v >= n:
            raise RangeError(f"line {lineno}: vertex id out of range [0, {n})")
        if u == v:
            raise ParseError(lineno, f"self-loop at vertex {u}")
        kind = Kind.INSERT if parts[0] == "+" else Kind.DELETE
        events.append(UpdateEvent(kind, edge(u, v)))
    if n is None:
        raise ParseError(max(len(lines), 1), "missing vertex count")
    return Stream(n, events)


def format_stream(n: int, events: Iterable[UpdateEvent]) -> str:
    out = [str(n)]
    out.extend(str(ev) for ev in events)
    return "\n".join(out) + "\n"


def replay(n: int, events: Iterable[UpdateEvent]) -> DynamicGraph:
    g = DynamicGraph(n)
    for ev in events:
        g.apply(ev)
    return g

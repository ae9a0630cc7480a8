"""Sparsifier for a uniform fractional matching, with batch-widening slack.

Input is a lambda-uniform fractional matching (every edge weighs lambda).
Level 0 holds all edges at weight lambda.  Each level peels vertices of low
remaining degree (<= 1/eps); the edges touching them are frozen at the
level's weight, and the rest is degree-split in half and promoted with
doubled weight.  The top level L, where 2^L lambda first lands in
[beta/2, beta), keeps what is left.

Insertions are buffered as pending edges and deletions are buffered per level;
once a buffer outgrows its slack (eps * i / k of the relevant edge set while
batch i is open) the affected levels are rebuilt.
"""

from __future__ import annotations

import math
import random
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable

from . import work
from .errors import BadWeights, BatchOrder, DuplicateEdge, MissingEdge
from .graph import DynamicGraph, Edge, UpdateEvent, edge
from .rational import Number, frac


@dataclass
class FractionalMatching:
    weights: dict[Edge, Fraction]

    def __post_init__(self) -> None:
        load: dict[int, Fraction] = {}
        for (u, v), w in self.weights.items():
            if not 0 <= w <= 1:
                raise BadWeights(f"weight {w} of edge ({u}, {v}) outside [0, 1]")
            for x in (u, v):
                load[x] = load.get(x, Fraction(0)) + w
        over = [v for v, s in load.items() if s > 1]
        if over:
            raise BadWeights(f"vertex {min(over)} carries weight {load[min(over)]} > 1")

    @property
    def size(self) -> Fraction:
        return sum(self.weights.values(), Fraction(0))

    def vertex_weight(self, v: int) -> Fraction:
        return sum((w for e, w in self.weights.items() if v in e), Fraction(0))

    def edges(self) -> list[Edge]:
        return sorted(self.weights)


def gen_uniform_fm(g: DynamicGraph, lam: Number, seed: int = 0) -> FractionalMatching:
    """Greedy maximal subgraph of ``g`` with degrees <= floor(1/lam), every edge weighted lam."""
    lam = frac(lam)
    if not 0 < lam <= 1:
        raise ValueError("lambda must lie in (0, 1]")
    cap = math.floor(1 / lam)
    order = g.edges()
    random.Random(seed).shuffle(order)
    deg = [0] * g.n
    chosen = {}
    for u, v in order:
        if deg[u] < cap and deg[v] < cap:
            deg[u] += 1
            deg[v] += 1
            chosen[(u, v)] = lam
    return FractionalMatching(chosen)


def level_count(lam: Number, beta: Number) -> int:
    """The unique L >= 0 with beta/2 <= 2^L lam < beta (0 when lam already >= beta/2)."""
    lam, beta = frac(lam), frac(beta)
    if not 0 < lam < beta:
        raise BadWeights(f"need 0 < lambda < beta, got lambda={lam}, beta={beta}")
    L = 0
    while 2 ** (L + 1) * lam < beta:
        L += 1
    return L


def degree_split(edges: Iterable[Edge]) -> set[Edge]:
    """Edges at even positions (1-based) of a greedy maximal-walk decomposition.

    Walks start at the lowest vertex that still has unused edges and are
    extended from both ends, always through the lowest unused neighbour,
    until both ends are stuck.  Every vertex keeps within 1 of half its degree.
    """
    adj: dict[int, list[int]] = {}
    for u, v in edges:
        adj.setdefault(u, []).append(v)
        adj.setdefault(v, []).append(u)
    for nbrs in adj.values():
        nbrs.sort()
    ptr = dict.fromkeys(adj, 0)
    used: set[Edge] = set()

    def step(v: int) -> int | None:
        nbrs, i = adj[v], ptr[v]
        while i < len(nbrs):
            w = nbrs[i]
            work.tick()
            if edge(v, w) not in used:
                ptr[v] = i
                return w
            i += 1
        ptr[v] = i
        return None

    def extend(start: int) -> list[Edge]:
        path, cur = [], start
        while (nxt := step(cur)) is not None:
            e = edge(cur, nxt)
            used.add(e)
            path.append(e)
            cur = nxt
        return path

    out: set[Edge] = set()
    for s in sorted(adj):
        while step(s) is not None:
            forward = extend(s)
            backward = extend(s)
            walk = backward[::-1] + forward
            out.update(walk[1::2])
    return out


def _peel(vertices: set[int], edges: set[Edge], limit: Fraction) -> set[int]:
    """Repeatedly take vertices whose degree towards untaken vertices is <= limit."""
    deg = dict.fromkeys(vertices, 0)
    nbrs: dict[int, list[int]] = {v: [] for v in vertices}
    for u, v in edges:
        deg[u] += 1
        deg[v] += 1
        nbrs[u].append(v)
        nbrs[v].append(u)
    work.tick(len(vertices) + 2 * len(edges))
    taken: set[int] = set()
    queue = sorted(v for v in vertices if deg[v] <= limit)
    queued = set(queue)
    while queue:
        v = queue.pop()
        taken.add(v)
        for w in nbrs[v]:
            work.tick()
            if w in taken:
                continue
            deg[w] -= 1
            if w not in queued and deg[w] <= limit:
                queued.add(w)
                queue.append(w)
    return taken


@dataclass
class Level:
    vertices: set[int] = field(default_factory=set)  # V^(>=i)
    peeled: set[int] = field(default_factory=set)  # V^(i)
    edges: set[Edge] = field(default_factory=set)  # E^(>=i)
    frozen: set[Edge] = field(default_factory=set)  # F^(i)
    deleted: set[Edge] = field(default_factory=set)  # D^(>=i)


class UniformSparsifier:
    """Level structure over a lambda-uniform fractional matching of ``n`` vertices.

    ``edges`` is the support of the input matching; every vertex may carry at
    most floor(1/lam) of them.  With ``k > 1`` the structure runs in batch
    mode and its guards use slack ``eps * i / k`` while batch i is open.
    """

    def __init__(
        self,
        n: int,
        edges: Iterable[Edge],
        lam: Number,
        beta: Number,
        eps: Number,
        k: int = 1,
    ) -> None:
        self.n = n
        self.lam = frac(lam)
        self.beta = frac(beta)
        self.eps = frac(eps)
        if not 0 < self.eps < 1:
            raise ValueError("eps must lie in (0, 1)")
        if k < 1:
            raise ValueError("k must be >= 1")
        self.L = level_count(self.lam, self.beta)
        self.cap = math.floor(1 / self.lam)
        self.k = k
        self.batch = 1 if k > 1 else k
        self.active: set[Edge] = set()
        self.pending: set[Edge] = set()
        self.load = [0] * n
        for e in edges:
            e = edge(*e)
            if e in self.active:
                raise DuplicateEdge(f"edge {e} listed twice")
            self._charge(e)
            self.active.add(e)
        self.levels = [Level() for _ in range(self.L + 1)]
        self.full_rebuilds = 0
        self.partial_rebuilds = 0
        self.last_rebuild: int | None = None
        self._static()

    # -- slack -------------------------------------------------------------
    @property
    def slack(self) -> Fraction:
        return self.eps * self.batch / self.k

    def set_batch(self, i: int) -> None:
        if not 1 <= i <= self.k:
            raise ValueError(f"batch index {i} outside [1, {self.k}]")
        if i < self.batch:
            raise BatchOrder(f"batch index went from {self.batch} down to {i}")
        self.batch = i

    # -- construction --------------------------------------------------------
    def _charge(self, e: Edge) -> None:
        for x in e:
            if self.load[x] + 1 > self.cap:
                raise BadWeights(
                    f"vertex {x} would carry {self.load[x] + 1} edges of weight {self.lam} > 1"
                )
        for x in e:
            self.load[x] += 1

    def _static(self) -> None:
        self.levels = [Level() for _ in range(self.L + 1)]
        self.levels[0].vertices = set(range(self.n))
        self.levels[0].edges = set(self.active)
        work.tick(self.n + len(self.active))
        self.rebuild(0)
        self.full_rebuilds += 1

    def rebuild(self, start: int) -> None:
        """Recompute levels ``start``..L from E^(>=start) and V^(>=start)."""
        if not 0 <= start <= self.L:
            raise ValueError(f"level {start} outside [0, {self.L}]")
        limit = 1 / self.eps
        lv = self.levels
        for i in range(start, self.L):
            cur = lv[i]
            cur.peeled = _peel(cur.vertices, cur.edges, limit)
            cur.frozen = {e for e in cur.edges if e[0] in cur.peeled or e[1] in cur.peeled}
            rest = cur.edges - cur.frozen
            work.tick(len(cur.edges))
            nxt = lv[i + 1]
            nxt.vertices = cur.vertices - cur.peeled
            nxt.edges = degree_split(sorted(rest))
            nxt.deleted = set()
            nxt.frozen = set()
            nxt.peeled = set()
        top = lv[self.L]
        top.frozen = set(top.edges)
        top.peeled = set(top.vertices)
        work.tick(len(top.edges))
        self.last_rebuild = start

    def clean_up(self, start: int) -> None:
        for i in range(start, self.L + 1):
            lv = self.levels[i]
            work.tick(len(lv.deleted))
            lv.edges -= lv.deleted
            lv.frozen -= lv.deleted
            lv.deleted = set()

    # -- updates -------------------------------------------------------------
    def _pending_breached(self) -> bool:
        return len(self.pending) > self.slack * len(self.active)

    def _merge_pending(self) -> None:
        self.clean_up(0)
        self.active |= self.pending
        work.tick(len(self.pending))
        self.pending = set()
        self._static()

    def insert(self, e: Edge) -> bool:
        """Returns True when the insertion triggered a rebuild."""
        e = edge(*e)
        work.tick()
        if e in self.active or e in self.pending:
            raise DuplicateEdge(f"edge {e} already present")
        self._charge(e)
        self.pending.add(e)
        self.last_rebuild = None
        if self._pending_breached():
            self._merge_pending()
            return True
        return False

    def top_level_of(self, e: Edge) -> int:
        for i in range(self.L, -1, -1):
            work.tick()
            if e in self.levels[i].edges:
                return i
        raise MissingEdge(f"edge {e} is active but on no level")

    def delete(self, e: Edge) -> bool:
        e = edge(*e)
        work.tick()
        self.last_rebuild = None
        if e in self.pending:
            self.pending.discard(e)
            for x in e:
                self.load[x] -= 1
            return False
        if e not in self.active:
            raise MissingEdge(f"edge {e} not present")
        top = self.top_level_of(e)
        self.active.discard(e)
        for x in e:
            self.load[x] -= 1
        for i in range(top + 1):
            self.levels[i].deleted.add(e)
        rebuilt = False
        j = self.breached_level()
        if j is not None:
            self.clean_up(j)
            self.rebuild(j)
            self.partial_rebuilds += 1
            rebuilt = True
        # a deletion shrinks the active set, which can break the pending guard
        if self._pending_breached():
            self._merge_pending()
            rebuilt = True
        return rebuilt

    def breached_level(self) -> int | None:
        s = self.slack
        for i, lv in enumerate(self.levels):
            work.tick()
            if len(lv.deleted) > s * len(lv.edges):
                return i
        return None

    def update(self, ev: UpdateEvent) -> bool:
        return self.insert(ev.edge) if ev.is_insert else self.delete(ev.edge)

    # -- output --------------------------------------------------------------
    def level_weight(self, i: int) -> Fraction:
        return self.lam * 2**i

    def output(self) -> dict[Edge, Fraction]:
        """Live frozen edges with their level weights."""
        out: dict[Edge, Fraction] = {}
        for i, lv in enumerate(self.levels):
            w = self.level_weight(i)
            for e in lv.frozen:
                if e not in lv.deleted:
                    out[e] = w
        return out

    def support(self) -> set[Edge]:
        return self.active | self.pending

    def input_size(self) -> Fraction:
        return self.lam * len(self.support())

    def output_size(self) -> Fraction:
        return sum(self.output().values(), Fraction(0))

    def dump(self) -> str:
        lines = [f"lambda={self.lam} beta={self.beta} eps={self.eps} L={self.L} batch={self.batch}/{self.k}"]
        lines.append(f"active={len(self.active)} pending={len(self.pending)}")
        for i, lv in enumerate(self.levels):
            lines.append(
                f"level {i}: h={self.level_weight(i)} V>={len(lv.vertices)} V={len(lv.peeled)} "
                f"E>={len(lv.edges)} F={len(lv.frozen)} D>={len(lv.deleted)}"
            )
        return "\n".join(lines)

    # scheduler protocol (used through SnapshotAdapter)
    def apply(self, ev: UpdateEvent) -> None:
        self.update(ev)


@dataclass
class UniformReport:
    weight_cap_ok: bool
    pending_ok: bool
    deleted_ok: list[bool]
    containment_ok: bool
    size_in: Fraction
    size_out: Fraction
    ratio_constant: Fraction | None  # c in size_in <= (1 + c eps log2(beta/lam)) size_out
    max_excess: Fraction  # max_v w'(v) - w(v)

    @property
    def exact_ok(self) -> bool:
        return self.weight_cap_ok and self.pending_ok and all(self.deleted_ok) and self.containment_ok


def check_uniform(us: UniformSparsifier) -> UniformReport:
    out = us.output()
    cap_ok = all(w < us.beta for w in out.values())
    s = us.slack
    pending_ok = len(us.pending) <= s * len(us.active)
    deleted_ok = [len(lv.deleted) <= s * len(lv.edges) for lv in us.levels]
    contain = True
    for i in range(us.L):
        lv, nxt = us.levels[i], us.levels[i + 1]
        if not nxt.edges <= (lv.edges - lv.frozen):
            contain = False
    size_in, size_out = us.input_size(), sum(out.values(), Fraction(0))
    log_term = Fraction(math.log2(us.beta / us.lam)) if us.beta > us.lam else Fraction(0)
    if size_in <= size_out:
        c: Fraction | None = Fraction(0)
    elif size_out == 0 or log_term == 0:
        c = None
    else:
        c = (size_in / size_out - 1) / (us.eps * log_term)
    w_in = [Fraction(0)] * us.n
    for u, v in us.support():
        w_in[u] += us.lam
        w_in[v] += us.lam
    w_out = [Fraction(0)] * us.n
    for (u, v), w in out.items():
        w_out[u] += w
        w_out[v] += w
    excess = max((w_out[v] - w_in[v] for v in range(us.n)), default=Fraction(0))
    return UniformReport(cap_ok, pending_ok, deleted_ok, contain, size_in, size_out, c, excess)


def static_uniform_sparsify(
    g: DynamicGraph | FractionalMatching, lam: Number, beta: Number, eps: Number, *, n: int | None = None
) -> UniformSparsifier:
    """Build the full level structure; ``g`` is the support graph of the matching."""
    if isinstance(g, FractionalMatching):
        if n is None:
            n = 1 + max((max(e) for e in g.weights), default=-1)
        return UniformSparsifier(n, g.edges(), lam, beta, eps)
    return UniformSparsifier(g.n, g.edges(), lam, beta, eps)


def us_insert(ls: UniformSparsifier, e: Edge) -> bool:
    return ls.insert(e)


def us_delete(ls: UniformSparsifier, e: Edge) -> bool:
    return ls.delete(e)


def set_batch_us(ls: UniformSparsifier, i: int) -> None:
    ls.set_batch(i)

"""Ground-truth matching routines and structural checkers.

``max_matching_exact`` is Edmonds' blossom algorithm (cardinality version).
Because it is the yardstick for everything else it is itself checked against
``exhaustive_matching_size``, a subset-DP enumeration that shares no code with it.
"""

from __future__ import annotations

from collections import Counter, deque
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from typing import TYPE_CHECKING, Iterable, Sequence

from .errors import WitnessMissing
from .graph import DynamicGraph, Edge, edge

if TYPE_CHECKING:
    from .vertex_sparsify import Partitioning

Matching = set[Edge]


# ---------------------------------------------------------------------------
# Blossom
# ---------------------------------------------------------------------------

def augment_from(adj: Sequence[Sequence[int]], mate: list[int], root: int) -> bool:
    """Search for an augmenting path starting at the free vertex ``root``.

    On success the path is applied to ``mate`` in place and True is returned.
    If no augmenting path starts at ``root`` the matching is left untouched;
    that remains true after any later augmentation, so callers may skip
    ``root`` from then on.
    """
    n = len(adj)
    used = [False] * n
    parent = [-1] * n
    base = list(range(n))
    used[root] = True
    queue = deque([root])

    def lca(a: int, b: int) -> int:
        seen = [False] * n
        while True:
            a = base[a]
            seen[a] = True
            if mate[a] == -1:
                break
            a = parent[mate[a]]
        while True:
            b = base[b]
            if seen[b]:
                return b
            b = parent[mate[b]]

    def mark_path(v: int, b: int, child: int, blossom: list[bool]) -> None:
        while base[v] != b:
            blossom[base[v]] = blossom[base[mate[v]]] = True
            parent[v] = child
            child = mate[v]
            v = parent[mate[v]]

    while queue:
        v = queue.popleft()
        for to in adj[v]:
            if base[v] == base[to] or mate[v] == to:
                continue
            if to == root or (mate[to] != -1 and parent[mate[to]] != -1):
                cur = lca(v, to)
                blossom = [False] * n
                mark_path(v, cur, to, blossom)
                mark_path(to, cur, v, blossom)
                for i in range(n):
                    if blossom[base[i]]:
                        base[i] = cur
                        if not used[i]:
                            used[i] = True
                            queue.append(i)
            elif parent[to] == -1:
                parent[to] = v
                if mate[to] == -1:
                    # flip the alternating path ending at `to`
                    x = to
                    while x != -1:
                        px = parent[x]
                        nxt = mate[px]
                        mate[x] = px
                        mate[px] = x
                        x = nxt
                    return True
                used[mate[to]] = True
                queue.append(mate[to])
    return False


def _sorted_adj(n: int, edges: Iterable[Edge]) -> list[list[int]]:
    adj: list[list[int]] = [[] for _ in range(n)]
    for u, v in edges:
        adj[u].append(v)
        adj[v].append(u)
    for a in adj:
        a.sort()
    return adj


def max_matching_mates(n: int, edges: Iterable[Edge]) -> list[int]:
    adj = _sorted_adj(n, edges)
    mate = [-1] * n
    # greedy seed; the blossom search then only has to fix the remainder
    for u in range(n):
        if mate[u] == -1:
            for v in adj[u]:
                if mate[v] == -1:
                    mate[u], mate[v] = v, u
                    break
    for r in range(n):
        if mate[r] == -1 and adj[r]:
            augment_from(adj, mate, r)
    return mate


def mates_to_matching(mate: Sequence[int]) -> Matching:
    return {(u, v) for u, v in enumerate(mate) if v > u}


def max_matching_exact(g: DynamicGraph) -> Matching:
    """A maximum-cardinality matching of ``g``."""
    return mates_to_matching(max_matching_mates(g.n, g.edges()))


def mu(g: DynamicGraph) -> int:
    return len(max_matching_exact(g))


def mu_of_edges(n: int, edges: Iterable[Edge]) -> int:
    return len(mates_to_matching(max_matching_mates(n, edges)))


def exhaustive_matching_size(n: int, edges: Iterable[Edge]) -> int:
    """Maximum matching size by exhaustive search over vertex subsets.

    Exponential; intended for n <= 16.
    """
    nbr = [0] * n
    for u, v in edges:
        nbr[u] |= 1 << v
        nbr[v] |= 1 << u

    @lru_cache(maxsize=None)
    def best(avail: int) -> int:
        while avail:
            v = (avail & -avail).bit_length() - 1
            cand = nbr[v] & avail
            if cand:
                rest = avail & ~(1 << v)
                top = best(rest)
                while cand:
                    low = cand & -cand
                    top = max(top, 1 + best(rest & ~low))
                    cand ^= low
                return top
            avail &= ~(1 << v)
        return 0

    return best((1 << n) - 1)


# ---------------------------------------------------------------------------
# Simple checkers
# ---------------------------------------------------------------------------

def check_matching(g: DynamicGraph, m: Iterable[Edge]) -> bool:
    """True iff ``m`` is vertex-disjoint and every edge is present in ``g``."""
    seen: set[int] = set()
    for u, v in m:
        if u == v or v not in g.adj[u]:
            return False
        if u in seen or v in seen:
            return False
        seen.add(u)
        seen.add(v)
    return True


@dataclass(frozen=True)
class ApproxCertificate:
    mu_exact: int
    matching_size: int
    alpha: Fraction
    delta: Fraction
    n: int

    @property
    def satisfied(self) -> bool:
        return self.matching_size * self.alpha + self.delta * self.n >= self.mu_exact


def certify(g: DynamicGraph, m: Iterable[Edge], alpha, delta=0) -> ApproxCertificate:
    """Check the (alpha, delta) approximation claim of ``m`` against the exact optimum."""
    m = list(m)
    return ApproxCertificate(mu(g), len(m), Fraction(alpha), Fraction(delta), g.n)


def effective_ratio(mu_g: int, mu_h: int, delta=0, n: int = 0) -> float:
    """Smallest alpha with ``mu_h * alpha + delta * n >= mu_g``."""
    need = mu_g - Fraction(delta) * n
    if need <= 0:
        return 1.0 if mu_h else 0.0
    if mu_h == 0:
        return float("inf")
    return float(need / mu_h)


# ---------------------------------------------------------------------------
# Damaged EDCS checker
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Violation:
    clause: str  # "a", "b" or "c"
    item: object
    detail: str

    def __str__(self) -> str:
        return f"({self.clause}) {self.item}: {self.detail}"


@dataclass
class EdcsReport:
    beta: Fraction
    lam: Fraction
    delta: Fraction
    witness: frozenset[int]
    violations: list[Violation] = field(default_factory=list)

    @property
    def valid(self) -> bool:
        return not self.violations

    def by_clause(self, clause: str) -> list[Violation]:
        return [v for v in self.violations if v.clause == clause]

    def to_text(self) -> str:
        head = (
            f"damaged-edcs beta={self.beta} lambda={self.lam} delta={self.delta} "
            f"|witness|={len(self.witness)} violations={len(self.violations)}"
        )
        return "\n".join([head, *(str(v) for v in self.violations)]) + "\n"


def _h_degrees(n: int, h: Iterable[Edge]) -> list[int]:
    deg = [0] * n
    for u, v in h:
        deg[u] += 1
        deg[v] += 1
    return deg


def greedy_witness(g: DynamicGraph, h: Iterable[Edge], beta, lam) -> set[int]:
    """Diagnostic witness: cover clause-(c) violators greedily by endpoint count.

    Not guaranteed to be small; deciding whether a small witness exists is a
    vertex-cover problem.
    """
    h = set(h)
    beta, lam = Fraction(beta), Fraction(lam)
    deg = _h_degrees(g.n, h)
    floor_c = beta * (1 - lam)
    bad = [e for e in g.edges() if e not in h and deg[e[0]] + deg[e[1]] < floor_c]
    witness: set[int] = set()
    while bad:
        count = Counter(x for e in bad for x in e)
        v = min(count, key=lambda x: (-count[x], x))
        witness.add(v)
        bad = [e for e in bad if v not in e]
    return witness


def check_damaged_edcs(
    g: DynamicGraph,
    h: Iterable[Edge],
    beta,
    lam,
    delta,
    witness: Iterable[int] | None = None,
    *,
    fallback: bool = False,
) -> EdcsReport:
    """Check the three damaged-EDCS clauses against a supplied witness set.

    (a) ``|witness| <= delta * n``; (b) every edge of ``h`` has ``deg_h <= beta``;
    (c) every edge of ``g`` outside ``h`` and disjoint from the witness has
    ``deg_h >= beta * (1 - lam)``.
    """
    beta, lam, delta = Fraction(beta), Fraction(lam), Fraction(delta)
    h = set(h)
    if witness is None:
        if not fallback:
            raise WitnessMissing("no witness supplied and fallback search disabled")
        witness = greedy_witness(g, h, beta, lam)
    wit = frozenset(witness)
    report = EdcsReport(beta, lam, delta, wit)
    if len(wit) > delta * g.n:
        report.violations.append(
            Violation("a", len(wit), f"|V_D|={len(wit)} exceeds delta*n={delta * g.n}")
        )
    deg = _h_degrees(g.n, h)
    for e in sorted(h):
        u, v = e
        if v not in g.adj[u]:
            report.violations.append(Violation("h", e, "sparsifier edge missing from graph"))
        d = deg[u] + deg[v]
        if d > beta:
            report.violations.append(Violation("b", e, f"deg_H={d} > beta={beta}"))
    floor_c = beta * (1 - lam)
    for e in g.edges():
        if e in h or e[0] in wit or e[1] in wit:
            continue
        d = deg[e[0]] + deg[e[1]]
        if d < floor_c:
            report.violations.append(Violation("c", e, f"deg_H={d} < beta(1-lambda)={floor_c}"))
    return report


def check_edcs(g: DynamicGraph, h: Iterable[Edge], beta, lam) -> EdcsReport:
    """Plain (undamaged) EDCS check: a damaged-EDCS check with an empty witness."""
    return check_damaged_edcs(g, h, beta, lam, 0, witness=())


# ---------------------------------------------------------------------------
# Matching-preserving partitionings
# ---------------------------------------------------------------------------

def concatenated_edges(edges: Iterable[Edge], part_of: Sequence[int]) -> set[Edge]:
    out: set[Edge] = set()
    for u, v in edges:
        p, q = part_of[u], part_of[v]
        if p != q:
            out.add(edge(p, q))
    return out


def preserved_size(edges: Iterable[Edge], part: "Partitioning") -> int:
    """mu of the concatenation of ``edges`` under one partitioning."""
    return mu_of_edges(part.d, concatenated_edges(edges, part.part_of))


def check_matching_preserving(
    g: DynamicGraph,
    family: Iterable["Partitioning"],
    planted: Iterable[Edge],
    eps,
    *,
    planted_only: bool = False,
) -> bool:
    """True iff some member's concatenation keeps a matching of size >= (1 - eps) k.

    With ``planted_only`` the concatenation is taken of the planted matching
    alone, which is the stricter reading (other graph edges cannot help).
    """
    planted = list(planted)
    k = len(planted)
    need = (1 - Fraction(eps)) * k
    source = planted if planted_only else g.edges()
    return any(preserved_size(source, part) >= need for part in family)

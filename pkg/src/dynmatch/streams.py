"""Seeded update-stream generators."""

from __future__ import annotations

import random
from collections import deque
from typing import Callable

from .graph import Edge, Kind, UpdateEvent, edge


class _EdgePool:
    """Live edge set with O(1) uniform sampling."""

    def __init__(self) -> None:
        self.items: list[Edge] = []
        self.index: dict[Edge, int] = {}

    def __contains__(self, e: Edge) -> bool:
        return e in self.index

    def __len__(self) -> int:
        return len(self.items)

    def add(self, e: Edge) -> None:
        self.index[e] = len(self.items)
        self.items.append(e)

    def remove(self, e: Edge) -> None:
        i = self.index.pop(e)
        last = self.items.pop()
        if i < len(self.items):
            self.items[i] = last
            self.index[last] = i

    def sample(self, rng: random.Random) -> Edge:
        return self.items[rng.randrange(len(self.items))]


def _fresh_edge(n: int, live, rng: random.Random, tries: int = 64) -> Edge | None:
    for _ in range(tries):
        u, v = rng.sample(range(n), 2)
        e = edge(u, v)
        if e not in live:
            return e
    return None


def erdos_renyi_dynamic(n: int, steps: int, seed: int = 0, *, target: int | None = None) -> list[UpdateEvent]:
    """Random insertions and deletions hovering around ``target`` edges (default 2n)."""
    if n < 2:
        return []
    rng = random.Random(seed)
    target = 2 * n if target is None else target
    live = _EdgePool()
    out: list[UpdateEvent] = []
    while len(out) < steps:
        p_insert = 0.9 if len(live) < target else 0.3
        if live and rng.random() >= p_insert:
            e = live.sample(rng)
            live.remove(e)
            out.append(UpdateEvent(Kind.DELETE, e))
            continue
        e = _fresh_edge(n, live, rng)
        if e is None:
            if not live:
                break
            continue
        live.add(e)
        out.append(UpdateEvent(Kind.INSERT, e))
    return out


def sliding_window(n: int, steps: int, seed: int = 0, *, window: int | None = None) -> list[UpdateEvent]:
    """Insert random new edges; once ``window`` (default 2n) are live, each deletion drops the oldest."""
    if n < 2:
        return []
    rng = random.Random(seed)
    window = max(1, 2 * n if window is None else window)
    window = min(window, n * (n - 1) // 2)
    order: deque[Edge] = deque()
    live: set[Edge] = set()
    out: list[UpdateEvent] = []
    while len(out) < steps:
        if len(order) >= window:
            e = order.popleft()
            live.discard(e)
            out.append(UpdateEvent(Kind.DELETE, e))
            continue
        e = _fresh_edge(n, live, rng, tries=1_000)
        if e is None:
            e = order.popleft()
            live.discard(e)
            out.append(UpdateEvent(Kind.DELETE, e))
            continue
        live.add(e)
        order.append(e)
        out.append(UpdateEvent(Kind.INSERT, e))
    return out


def planted_matching_adversarial(
    n: int, steps: int, seed: int = 0, *, parts: int | None = None
) -> list[UpdateEvent]:
    """A perfect matching inside one part of a random vertex partition, then random churn.

    The planted edges are inserted first and never deleted; the remaining
    steps insert and delete random edges outside the planted part.
    """
    if n < 2:
        return []
    rng = random.Random(seed)
    parts = max(2, n // 8) if parts is None else parts
    part_of = [rng.randrange(parts) for _ in range(n)]
    sizes = [part_of.count(p) for p in range(parts)]
    target = max(range(parts), key=lambda p: (sizes[p], -p))
    inside = [v for v in range(n) if part_of[v] == target]
    rng.shuffle(inside)
    out: list[UpdateEvent] = []
    planted: set[Edge] = set()
    for a, b in zip(inside[::2], inside[1::2]):
        if len(out) >= steps:
            return out
        e = edge(a, b)
        planted.add(e)
        out.append(UpdateEvent(Kind.INSERT, e))
    outside = [v for v in range(n) if part_of[v] != target]
    if len(outside) < 2:
        outside = list(range(n))
    live = _EdgePool()
    target_m = 2 * n
    misses = 0
    while len(out) < steps and misses < 10_000:
        if live and rng.random() >= (0.9 if len(live) < target_m else 0.3):
            e = live.sample(rng)
            live.remove(e)
            out.append(UpdateEvent(Kind.DELETE, e))
            continue
        u, v = rng.sample(outside, 2)
        e = edge(u, v)
        if e in live or e in planted:
            misses += 1
            continue
        misses = 0
        live.add(e)
        out.append(UpdateEvent(Kind.INSERT, e))
    return out


GENERATORS: dict[str, Callable[..., list[UpdateEvent]]] = {
    "erdos-renyi-dynamic": erdos_renyi_dynamic,
    "sliding-window": sliding_window,
    "planted-matching-adversarial": planted_matching_adversarial,
}


def generate(kind: str, n: int, steps: int, seed: int = 0) -> list[UpdateEvent]:
    try:
        gen = GENERATORS[kind]
    except KeyError:
        raise ValueError(f"unknown stream kind {kind!r}; choose from {sorted(GENERATORS)}") from None
    if n < 1 or steps < 0:
        raise ValueError("need n >= 1 and steps >= 0")
    return gen(n, steps, seed)

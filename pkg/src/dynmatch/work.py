"""Work-unit instrumentation.

A work unit is one adjacency mutation, one degree read or one set-membership
test performed by library code.  Every module charges work through :func:`tick`
so that harness overhead never shows up in the counters.
"""

from __future__ import annotations

from contextlib import contextmanager
from typing import Iterator

_total = 0


def tick(units: int = 1) -> None:
    global _total
    _total += units


def total() -> int:
    return _total


class Meter:
    """Accumulates the work done inside ``with meter:`` blocks."""

    def __init__(self) -> None:
        self.units = 0
        self._start: list[int] = []

    def __enter__(self) -> "Meter":
        self._start.append(_total)
        return self

    def __exit__(self, *exc: object) -> None:
        self.units += _total - self._start.pop()


@contextmanager
def measure() -> Iterator[Meter]:
    m = Meter()
    with m:
        yield m

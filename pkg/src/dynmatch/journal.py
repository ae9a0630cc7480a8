"""Undo journal used to revert whole batches of work exactly."""

from __future__ import annotations

from typing import Callable

from . import work


class Journal:
    """Log of inverse operations.

    Mutating code calls :meth:`record` with a zero-argument callable that undoes
    the mutation.  :meth:`rollback` replays the inverses newest-first, charging
    one work unit per entry, so reverting costs time proportional to the work
    being undone.
    """

    __slots__ = ("_log",)

    def __init__(self) -> None:
        self._log: list[Callable[[], None]] = []

    def record(self, undo: Callable[[], None]) -> None:
        self._log.append(undo)

    def mark(self) -> int:
        return len(self._log)

    def rollback(self, mark: int) -> int:
        if mark > len(self._log):
            raise ValueError(f"mark {mark} is past the end of the journal")
        undone = 0
        log = self._log
        while len(log) > mark:
            log.pop()()
            undone += 1
        work.tick(undone)
        return undone

    def __len__(self) -> int:
        return len(self._log)

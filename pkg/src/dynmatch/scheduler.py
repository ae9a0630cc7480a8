"""Worst-case scheduling of k batch-dynamic instances.

Step ``lam`` is written as k base-k digits, most significant first.  Instance
i is *fresh* at ``lam`` when none of the first k-1 digits equals i; it then
appends the event to its newest batch.  Otherwise ``lam`` lies in a reset
window anchored at the first occurrence of i: with gamma digits after that
position, the window covers ``k**gamma`` steps split into phases
``I_gamma, ..., I_1, I_0`` of lengths ``(k-1) k**(j-1)`` (and 1 for I_0).

* start of I_gamma: undo batch levels 1..gamma+1, replay their events as one
  batch at level gamma+1;
* start of I_j (0 < j < gamma): replay the events of I_{j+1} as level j+1;
* at I_0: replay I_1 and the current event as level 1.

Reset work is executed when its phase starts and charged to the instance in
equal slices over the phase, which is what the per-step work profile of an
incremental execution would be.  No output of a non-fresh instance is read,
so the early execution is not observable through fresh outputs.
"""

from __future__ import annotations

import copy
import math
from abc import ABC, abstractmethod
from dataclasses import dataclass, field
from typing import Callable, Hashable

from . import work
from .errors import StepCapExceeded
from .graph import DynamicGraph, Edge, UpdateEvent
from .journal import Journal


# ---------------------------------------------------------------------------
# Algorithm interface
# ---------------------------------------------------------------------------

class BatchAlgorithm(ABC):
    """A k batch-dynamic algorithm that can undo its most recent batches.

    Batch indices run 1..k in processing order.  Subclasses supply
    :meth:`checkpoint` / :meth:`restore`, :meth:`on_batch`, :meth:`process`
    and :meth:`output`.
    """

    def __init__(self) -> None:
        self._batch_marks: list[object] = []

    def begin_batch(self, index: int) -> None:
        self._batch_marks.append(self.checkpoint())
        self.on_batch(index)

    def revert_batches(self, count: int) -> None:
        """Return to the state before the last ``count`` batches began."""
        if count <= 0:
            return
        if count > len(self._batch_marks):
            raise ValueError(f"cannot revert {count} batches, only {len(self._batch_marks)} open")
        mark = self._batch_marks[-count]
        del self._batch_marks[-count:]
        self.restore(mark)

    @property
    def open_batches(self) -> int:
        return len(self._batch_marks)

    @abstractmethod
    def checkpoint(self) -> object: ...

    @abstractmethod
    def restore(self, mark: object) -> None: ...

    def on_batch(self, index: int) -> None:
        pass

    @abstractmethod
    def process(self, ev: UpdateEvent) -> None: ...

    @abstractmethod
    def output(self) -> Hashable | set[Edge]: ...


class JournaledAlgorithm(BatchAlgorithm):
    """Undo through a :class:`Journal`; reverting costs one unit per logged change."""

    def __init__(self) -> None:
        super().__init__()
        self.journal = Journal()

    def checkpoint(self) -> int:
        return self.journal.mark()

    def restore(self, mark: object) -> None:
        self.journal.rollback(mark)  # type: ignore[arg-type]


class SnapshotAdapter(BatchAlgorithm):
    """Undo by deep-copying an arbitrary state object at every batch start.

    For algorithms that do not journal their mutations.  ``state`` must
    offer ``set_batch(i)``, ``apply(ev)`` and ``output()``.
    """

    def __init__(self, state) -> None:
        super().__init__()
        self.state = state

    def checkpoint(self) -> object:
        return copy.deepcopy(self.state)

    def restore(self, mark: object) -> None:
        self.state = mark

    def on_batch(self, index: int) -> None:
        self.state.set_batch(index)

    def process(self, ev: UpdateEvent) -> None:
        self.state.apply(ev)

    def output(self):
        return self.state.output()


class RecordingAlgorithm(JournaledAlgorithm):
    """Test double whose state is the list of (batch index, event) it has seen."""

    def __init__(self) -> None:
        super().__init__()
        self.seen: list[tuple[int, UpdateEvent]] = []
        self.batch = 0

    def on_batch(self, index: int) -> None:
        old = self.batch
        self.journal.record(lambda: setattr(self, "batch", old))
        self.batch = index

    def process(self, ev: UpdateEvent) -> None:
        work.tick()
        self.seen.append((self.batch, ev))
        self.journal.record(self.seen.pop)

    def output(self) -> tuple[tuple[int, UpdateEvent], ...]:
        return tuple(self.seen)


# ---------------------------------------------------------------------------
# Schedule arithmetic
# ---------------------------------------------------------------------------

def digits(lam: int, k: int) -> list[int]:
    """``lam`` as exactly k base-k digits, most significant first."""
    out = [0] * k
    for p in range(k - 1, -1, -1):
        lam, out[p] = divmod(lam, k)
    return out


def is_fresh(lam: int, i: int, k: int) -> bool:
    return i not in digits(lam, k)[: k - 1]


def fresh_set(lam: int, k: int) -> set[int]:
    head = set(digits(lam, k)[: k - 1])
    return {i for i in range(k) if i not in head}


@dataclass(frozen=True)
class Phase:
    """Where step ``lam`` sits inside instance i's reset window."""

    anchor: int  # first step of the window
    gamma: int
    j: int  # phase index, gamma down to 0
    start: int  # first step of this phase
    length: int

    @property
    def end(self) -> int:
        return self.start + self.length


def locate(lam: int, i: int, k: int) -> Phase | None:
    """The reset phase of instance i at step ``lam``, or None when i is fresh."""
    d = digits(lam, k)
    try:
        p = d[: k - 1].index(i)
    except ValueError:
        return None
    gamma = k - 1 - p
    span = k**gamma
    anchor = lam - lam % span
    off = lam - anchor
    if off == span - 1:
        return Phase(anchor, gamma, 0, lam, 1)
    # phase j covers offsets [k^g - k^j, k^g - k^(j-1))
    j = gamma
    while off >= span - k ** (j - 1):
        j -= 1
    start = anchor + span - k**j
    return Phase(anchor, gamma, j, start, (k - 1) * k ** (j - 1))


def level_index(level: int, k: int) -> int:
    """Batch index (processing order) of stack level ``level``."""
    return k - level + 1


def smallest_k(length: int) -> int:
    k = 2
    while k**k < length:
        k += 1
    return k


# ---------------------------------------------------------------------------
# Scheduler
# ---------------------------------------------------------------------------

@dataclass
class Batch:
    level: int
    events: list[UpdateEvent] = field(default_factory=list)


@dataclass
class Deferred:
    """Work already done for a reset phase but charged over its remaining steps."""

    remaining: int = 0
    steps_left: int = 0

    def step_quantum(self) -> int:
        if self.steps_left <= 0:
            return 0
        q = math.ceil(self.remaining / self.steps_left)
        self.remaining -= q
        self.steps_left -= 1
        return q


class BatchScheduler:
    def __init__(self, k: int, factory: Callable[[], BatchAlgorithm]) -> None:
        if k < 2:
            raise ValueError("k must be >= 2")
        self.k = k
        self.factory = factory
        self.instances = [factory() for _ in range(k)]
        self.stacks: list[list[Batch]] = [[] for _ in range(k)]
        self.queues = [Deferred() for _ in range(k)]
        self.lam = 0
        self.history: list[UpdateEvent] = []
        self.fresh: set[int] = set(range(k))
        self.last_work: list[int] = [0] * k

    @property
    def cap(self) -> int:
        return self.k**self.k

    # -- batch stack helpers ------------------------------------------------
    def _run_batch(self, i: int, level: int, events: list[UpdateEvent]) -> None:
        alg = self.instances[i]
        alg.begin_batch(level_index(level, self.k))
        for ev in events:
            alg.process(ev)
        self.stacks[i].append(Batch(level, list(events)))

    def _revert_through(self, i: int, level: int) -> list[UpdateEvent]:
        stack = self.stacks[i]
        popped: list[Batch] = []
        while stack and stack[-1].level <= level:
            popped.append(stack.pop())
        self.instances[i].revert_batches(len(popped))
        out: list[UpdateEvent] = []
        for b in reversed(popped):
            out.extend(b.events)
        return out

    def batch_sizes(self, i: int) -> dict[int, int]:
        return {b.level: len(b.events) for b in self.stacks[i]}

    # -- stepping -------------------------------------------------------------
    def step(self, ev: UpdateEvent) -> dict[int, object]:
        """Feed one update; returns the outputs of the instances fresh at this step."""
        lam = self.lam
        if lam >= self.cap:
            raise StepCapExceeded(f"step {lam} exceeds the k**k = {self.cap} input cap")
        k = self.k
        self.history.append(ev)
        fresh = set()
        for i in range(k):
            phase = locate(lam, i, k)
            with work.Meter() as meter:
                if phase is None:
                    fresh.add(i)
                    stack = self.stacks[i]
                    if stack and stack[-1].level == 1:
                        self.instances[i].process(ev)
                        stack[-1].events.append(ev)
                    else:
                        self._run_batch(i, 1, [ev])
                elif lam == phase.start:
                    self._start_phase(i, phase)
            direct = meter.units
            q = self.queues[i]
            if phase is not None and lam == phase.start and phase.j > 0:
                q.remaining, q.steps_left = direct, phase.length
                direct = 0
            self.last_work[i] = direct + q.step_quantum()
        self.fresh = fresh
        self.lam += 1
        return {i: self.instances[i].output() for i in sorted(fresh)}

    def _start_phase(self, i: int, ph: Phase) -> None:
        k = self.k
        if ph.j == ph.gamma:
            events = self._revert_through(i, ph.gamma + 1)
            self._run_batch(i, ph.gamma + 1, events)
        elif ph.j > 0:
            lo = ph.anchor + k**ph.gamma - k ** (ph.j + 1)
            hi = ph.anchor + k**ph.gamma - k**ph.j
            self._run_batch(i, ph.j + 1, self.history[lo:hi])
        else:
            lo = ph.anchor + k**ph.gamma - k
            self._run_batch(i, 1, self.history[lo : self.lam + 1])

    def outputs(self) -> list[object]:
        return [a.output() for a in self.instances]

    def reference_output(self, i: int) -> object:
        """Output of a fresh instance fed instance i's current batch stack from scratch."""
        ref = self.factory()
        for b in self.stacks[i]:
            ref.begin_batch(level_index(b.level, self.k))
            for ev in b.events:
                ref.process(ev)
        return ref.output()


def sched_init(k: int, factory: Callable[[], BatchAlgorithm]) -> BatchScheduler:
    return BatchScheduler(k, factory)


def sched_step(state: BatchScheduler, ev: UpdateEvent) -> dict[int, object]:
    return state.step(ev)


class UnionGraph:
    """Union of the instances' matchings restricted to the live graph.

    Keeps a multiplicity per edge and a simple graph view; ``sync`` returns
    the view's changes so a downstream matcher can follow them.
    """

    def __init__(self, n: int) -> None:
        self.graph = DynamicGraph(n)
        self.count: dict[Edge, int] = {}
        self.held: list[set[Edge]] = []

    def sync(self, outputs: list[set[Edge]], live: DynamicGraph) -> list[UpdateEvent]:
        while len(self.held) < len(outputs):
            self.held.append(set())
        changes: list[UpdateEvent] = []
        for idx, out in enumerate(outputs):
            cur = {e for e in out if e[1] in live.adj[e[0]]}
            work.tick(len(out))
            old = self.held[idx]
            for e in old - cur:
                c = self.count[e] - 1
                if c:
                    self.count[e] = c
                else:
                    del self.count[e]
                    self.graph.remove_edge(*e)
                    changes.append(UpdateEvent.delete(*e))
            for e in cur - old:
                c = self.count.get(e, 0)
                self.count[e] = c + 1
                if not c:
                    self.graph.add_edge(*e)
                    changes.append(UpdateEvent.insert(*e))
            self.held[idx] = cur
        return changes


def sched_union(state: BatchScheduler, live: DynamicGraph) -> DynamicGraph:
    """Union of all instance outputs that are still edges of ``live``."""
    union = UnionGraph(live.n)
    union.sync([set(o) for o in state.outputs()], live)
    return union.graph

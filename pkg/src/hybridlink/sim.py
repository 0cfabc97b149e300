"""Deterministic discrete-event scheduler.

Virtual time is an integer count of microseconds. Events fire in
``(fire_at, seq)`` order, so events scheduled for the same instant run in
the order they were scheduled.
"""
from __future__ import annotations

import heapq
import itertools
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

US_PER_MS = 1_000
US_PER_S = 1_000_000

# Event kinds used by the link simulation.
CHUNK_COMPLETION = "chunk-completion"
CONTROL_TICK = "control-tick"
DEPTH_CHANGE = "depth-change"
SWITCH_COMMAND = "switch-command"
TRACE_SAMPLE = "trace-sample"


class CausalityError(ValueError):
    """Raised when an event is scheduled before the current virtual time."""


def ms(value: float) -> int:
    """Milliseconds to integer microseconds (rounded to nearest)."""
    return int(round(value * US_PER_MS))


def to_ms(t_us: int) -> float:
    return t_us / US_PER_MS


@dataclass(order=True)
class Event:
    fire_at: int
    seq: int
    kind: str = field(compare=False)
    action: Optional[Callable[[int], None]] = field(compare=False, default=None)


class Simulator:
    """Single-threaded event loop over integer-microsecond virtual time."""

    def __init__(self, log_events: bool = False):
        self._now = 0
        self._queue: list[Event] = []
        self._seq = itertools.count()
        self._cancelled: set[int] = set()
        self.log: list[tuple[int, int, str]] | None = [] if log_events else None

    def now(self) -> int:
        return self._now

    def schedule(self, fire_at: int, kind: str, action: Callable[[int], None] | None = None) -> int:
        fire_at = int(fire_at)
        if fire_at < self._now:
            raise CausalityError(
                f"causality violation: event '{kind}' at {fire_at} us is before now={self._now} us")
        ev = Event(fire_at, next(self._seq), kind, action)
        heapq.heappush(self._queue, ev)
        return ev.seq

    def schedule_in(self, delay: int, kind: str, action=None) -> int:
        return self.schedule(self._now + int(delay), kind, action)

    def cancel(self, event_id: int) -> None:
        self._cancelled.add(event_id)

    def pending(self) -> int:
        return len(self._queue)

    def run_until(self, t_end: int) -> int:
        """Process every event with ``fire_at <= t_end``; leave ``now() == t_end``."""
        t_end = int(t_end)
        if t_end < self._now:
            raise CausalityError(f"run_until({t_end}) is before now={self._now}")
        processed = 0
        queue = self._queue
        while queue and queue[0].fire_at <= t_end:
            ev = heapq.heappop(queue)
            if ev.seq in self._cancelled:
                self._cancelled.discard(ev.seq)
                continue
            self._now = ev.fire_at
            if self.log is not None:
                self.log.append((ev.fire_at, ev.seq, ev.kind))
            if ev.action is not None:
                ev.action(ev.fire_at)
            processed += 1
        self._now = t_end
        return processed


def seeded_rng(seed: int) -> np.random.Generator:
    """Independent PCG64 stream; the same seed always gives the same draws."""
    return np.random.Generator(np.random.PCG64(int(seed)))

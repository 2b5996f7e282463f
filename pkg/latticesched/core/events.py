"""
Discrete-event queue.

Completion events are ordered by (time, kind priority, operation id).
Handlers subscribe per event kind, and all events sharing the earliest
time are delivered together. DISPATCH sorts last, so a dispatch queued
at an instant runs after every completion at that instant.
"""

import heapq
import itertools
from dataclasses import dataclass, field
from enum import IntEnum
from fractions import Fraction
from typing import Any, Callable, Dict, List, Optional, Tuple

from .layout import Coord


class EventKind(IntEnum):
    """Event kinds; lower values are delivered first at equal times."""

    ROUTE_COMPLETE = 0
    ROTATION_COMPLETE = 1
    CULTIVATION_READY = 2
    DISPATCH = 3


@dataclass
class Event:
    """A completion (or wake-up) at a simulated instant; ``released`` lists the cells it frees."""

    time: Fraction
    kind: EventKind
    op_id: int
    released: Tuple[Coord, ...] = ()
    payload: Dict[str, Any] = field(default_factory=dict)

    def __post_init__(self) -> None:
        self.time = Fraction(self.time)
        if self.time < 0:
            raise ValueError("Event time must be nonnegative")

    @property
    def sort_key(self) -> Tuple[Fraction, int, int]:
        return (self.time, int(self.kind), self.op_id)


Handler = Callable[[Event], None]


class EventQueue:
    """
    Priority queue of events with per-kind handlers.

    Example:
        ```python
        queue = EventQueue()
        queue.subscribe(EventKind.ROUTE_COMPLETE, on_route_complete)
        queue.push(Event(Fraction(4), EventKind.ROUTE_COMPLETE, op_id=0))
        now = queue.deliver_next()
        ```
    """

    def __init__(self) -> None:
        self._heap: List[Tuple[Tuple[Fraction, int, int], int, Event]] = []
        self._counter = itertools.count()
        self._handlers: Dict[EventKind, List[Handler]] = {}
        self.now = Fraction(0)
        self.history: List[Event] = []

    def subscribe(self, kind: EventKind, handler: Handler) -> None:
        self._handlers.setdefault(kind, []).append(handler)

    def push(self, event: Event) -> None:
        if event.time < self.now:
            raise ValueError(f"Event at {event.time} scheduled in the past (now={self.now})")
        heapq.heappush(self._heap, (event.sort_key, next(self._counter), event))

    def __len__(self) -> int:
        return len(self._heap)

    def peek_time(self) -> Optional[Fraction]:
        return self._heap[0][0][0] if self._heap else None

    def pop_simultaneous(self) -> List[Event]:
        """Remove and return every event at the earliest pending time, in delivery order."""
        if not self._heap:
            return []
        time = self._heap[0][0][0]
        events = []
        while self._heap and self._heap[0][0][0] == time:
            events.append(heapq.heappop(self._heap)[2])
        self.now = time
        return events

    def deliver_next(self) -> Optional[Fraction]:
        """
        Deliver all events at the next instant to their handlers.

        Returns:
            The new simulated time, or ``None`` when the queue is empty
        """
        events = self.pop_simultaneous()
        if not events:
            return None
        for event in events:
            self.history.append(event)
            for handler in self._handlers.get(event.kind, []):
                handler(event)
        return self.now

"""
Tests for the discrete-event queue.
"""

from fractions import Fraction

import pytest

from latticesched.core.events import Event, EventKind, EventQueue


class TestEvent:
    """Tests for Event."""

    def test_time_is_exact(self):
        """Test event times are stored as fractions."""
        assert Event(2, EventKind.DISPATCH, 0).time == Fraction(2)

    def test_negative_time(self):
        """Test events cannot be scheduled before zero."""
        with pytest.raises(ValueError):
            Event(Fraction(-1), EventKind.DISPATCH, 0)

    def test_sort_key(self):
        """Test the key is (time, kind, op id)."""
        event = Event(Fraction(3, 2), EventKind.ROTATION_COMPLETE, 7)
        assert event.sort_key == (Fraction(3, 2), 1, 7)


class TestEventQueue:
    """Tests for EventQueue."""

    def test_simultaneous_events_are_coalesced(self):
        """Test events at one instant come out together, routes before rotations."""
        queue = EventQueue()
        queue.push(Event(Fraction(4), EventKind.ROTATION_COMPLETE, 1))
        queue.push(Event(Fraction(4), EventKind.ROUTE_COMPLETE, 2))
        queue.push(Event(Fraction(2), EventKind.DISPATCH, 0))
        queue.push(Event(Fraction(4), EventKind.ROUTE_COMPLETE, 0))

        assert queue.peek_time() == 2
        assert [e.op_id for e in queue.pop_simultaneous()] == [0]
        assert queue.now == 2
        later = queue.pop_simultaneous()
        assert [(e.kind, e.op_id) for e in later] == [
            (EventKind.ROUTE_COMPLETE, 0),
            (EventKind.ROUTE_COMPLETE, 2),
            (EventKind.ROTATION_COMPLETE, 1),
        ]
        assert queue.now == 4
        assert len(queue) == 0

    def test_handlers_and_history(self):
        """Test delivery calls the subscribed handlers and records history."""
        queue = EventQueue()
        seen = []
        queue.subscribe(EventKind.ROUTE_COMPLETE, lambda e: seen.append(("route", e.op_id)))
        queue.subscribe(EventKind.ROUTE_COMPLETE, lambda e: seen.append(("again", e.op_id)))
        queue.push(Event(Fraction(5), EventKind.ROUTE_COMPLETE, 3))
        queue.push(Event(Fraction(5), EventKind.CULTIVATION_READY, 4))

        assert queue.deliver_next() == 5
        assert seen == [("route", 3), ("again", 3)]
        assert [e.op_id for e in queue.history] == [3, 4]

    def test_empty_queue(self):
        """Test an empty queue delivers nothing."""
        queue = EventQueue()
        assert queue.peek_time() is None
        assert queue.pop_simultaneous() == []
        assert queue.deliver_next() is None

    def test_past_events_rejected(self):
        """Test events cannot be pushed behind the clock."""
        queue = EventQueue()
        queue.push(Event(Fraction(3), EventKind.DISPATCH, 0))
        queue.deliver_next()
        with pytest.raises(ValueError):
            queue.push(Event(Fraction(1), EventKind.DISPATCH, 1))

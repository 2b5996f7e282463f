"""
Common schedule model.

Every executor lowers its result to an :class:`EventSchedule`: a list of
reserved intervals (cells held over ``[start, end)``) that the trace CSV,
the validator and the oracle replay all consume.
"""

import csv
from collections import defaultdict
from dataclasses import dataclass, field
from decimal import Decimal
from enum import Enum
from fractions import Fraction
from pathlib import Path
from typing import Callable, Dict, List, Optional, Sequence, Tuple, Union

from .circuit import LogicalCircuit
from .layout import CellRole, Coord, LayoutGrid

TRACE_HEADER = ("time_start", "time_end", "op_id", "stage", "kind", "cells")


class Stage(str, Enum):
    A = "A"
    B = "B"
    C = "C"
    INPLACE = "I"


def format_cycles(value: Fraction) -> str:
    """Exact decimal text for terminating fractions, ``p/q`` otherwise."""
    value = Fraction(value)
    den = value.denominator
    for prime in (2, 5):
        while den % prime == 0:
            den //= prime
    if den != 1:
        return f"{value.numerator}/{value.denominator}"
    return format((Decimal(value.numerator) / Decimal(value.denominator)).normalize(), "f")


@dataclass(frozen=True)
class Interval:
    """
    One scheduled operation.

    ``operands`` is aligned with ``gate_ids``: ``(control, target)`` for
    CNOT stages, ``(target,)`` for rotations, the gate's qubits for in-place
    gates. ``group`` names the lock owner whose qubits stay locked from its
    first to its last interval.
    """

    op_id: int
    stage: Stage
    kind: str
    start: Fraction
    end: Fraction
    cells: Tuple[Coord, ...] = ()
    gate_ids: Tuple[int, ...] = ()
    operands: Tuple[Tuple[int, ...], ...] = ()
    group: str = ""

    def __post_init__(self) -> None:
        if self.start < 0 or self.end < self.start:
            raise ValueError(f"Interval {self.op_id} has invalid bounds [{self.start}, {self.end})")
        if len(self.operands) != len(self.gate_ids):
            raise ValueError(f"Interval {self.op_id} operands do not align with gate ids")

    @property
    def qubits(self) -> Tuple[int, ...]:
        return tuple(sorted({q for ops in self.operands for q in ops}))

    @property
    def duration(self) -> Fraction:
        return self.end - self.start

    def overlaps(self, other: "Interval") -> bool:
        return self.start < other.end and other.start < self.end

    def to_row(self) -> List[str]:
        return [
            format_cycles(self.start),
            format_cycles(self.end),
            str(self.op_id),
            self.stage.value,
            self.kind,
            ";".join(f"{r}:{c}" for r, c in sorted(self.cells)),
        ]


@dataclass
class EventSchedule:
    """Intervals of one executor run plus its makespan."""

    mode: str
    intervals: List[Interval] = field(default_factory=list)
    total_cycles: Fraction = Fraction(0)
    dispatch_log: List[Tuple[Fraction, Stage, str]] = field(default_factory=list)
    counts: Dict[str, int] = field(default_factory=dict)

    def makespan(self) -> Fraction:
        return max((i.end for i in self.intervals), default=Fraction(0))

    def ordered(self) -> List[Interval]:
        return sorted(self.intervals, key=lambda i: (i.start, i.op_id))

    def group_spans(self) -> Dict[str, Tuple[Fraction, Fraction]]:
        spans: Dict[str, Tuple[Fraction, Fraction]] = {}
        for interval in self.intervals:
            start, end = spans.get(interval.group, (interval.start, interval.end))
            spans[interval.group] = (min(start, interval.start), max(end, interval.end))
        return spans

    def stage_b_cycles(self) -> Fraction:
        """Sum over lock groups of the span of their rotation stage."""
        spans: Dict[str, Tuple[Fraction, Fraction]] = {}
        for interval in self.intervals:
            if interval.stage != Stage.B:
                continue
            start, end = spans.get(interval.group, (interval.start, interval.end))
            spans[interval.group] = (min(start, interval.start), max(end, interval.end))
        return sum((end - start for start, end in spans.values()), Fraction(0))

    def trace_rows(self) -> List[List[str]]:
        return [i.to_row() for i in self.ordered()]

    def write_csv(self, path: Union[str, Path]) -> None:
        with open(path, "w", newline="", encoding="utf-8") as handle:
            writer = csv.writer(handle, lineterminator="\n")
            writer.writerow(TRACE_HEADER)
            writer.writerows(self.trace_rows())


def _cell_violations(schedule: EventSchedule, grid: Optional[LayoutGrid]) -> List[str]:
    found = []
    by_cell: Dict[Coord, List[Interval]] = defaultdict(list)
    for interval in schedule.intervals:
        for cell in interval.cells:
            by_cell[cell].append(interval)
    for cell in sorted(by_cell):
        if grid is not None and (not grid.in_bounds(cell) or grid.role(cell) == CellRole.WALL):
            found.append(f"cell {cell}: not a reservable cell")
        ordered = sorted(by_cell[cell], key=lambda i: (i.start, i.end, i.op_id))
        latest: Optional[Interval] = None
        for interval in ordered:
            if latest is not None and latest.overlaps(interval):
                found.append(
                    f"cell {cell}: op {latest.op_id} [{format_cycles(latest.start)}, {format_cycles(latest.end)}) "
                    f"overlaps op {interval.op_id} [{format_cycles(interval.start)}, {format_cycles(interval.end)})"
                )
            if latest is None or interval.end > latest.end:
                latest = interval
    return found


def _stage_order_violations(schedule: EventSchedule) -> List[str]:
    found = []
    stages: Dict[str, Dict[Stage, List[Interval]]] = defaultdict(lambda: defaultdict(list))
    for interval in schedule.intervals:
        stages[interval.group][interval.stage].append(interval)
    for group in sorted(stages):
        by_stage = stages[group]
        sequence = [s for s in (Stage.A, Stage.B, Stage.C) if by_stage.get(s)]
        for earlier, later in zip(sequence, sequence[1:]):
            end = max(i.end for i in by_stage[earlier])
            start = min(i.start for i in by_stage[later])
            if end > start:
                found.append(
                    f"group {group}: stage {earlier.value} ends at {format_cycles(end)} "
                    f"after stage {later.value} starts at {format_cycles(start)}"
                )
    return found


def _qubit_violations(schedule: EventSchedule) -> List[str]:
    found = []
    qubits_of: Dict[str, set] = defaultdict(set)
    for interval in schedule.intervals:
        qubits_of[interval.group].update(interval.qubits)
    locks: Dict[int, List[Tuple[Fraction, Fraction, str]]] = defaultdict(list)
    for group, (start, end) in schedule.group_spans().items():
        for qubit in qubits_of[group]:
            locks[qubit].append((start, end, group))
    for qubit in sorted(locks):
        ordered = sorted(locks[qubit])
        latest: Optional[Tuple[Fraction, Fraction, str]] = None
        for span in ordered:
            if latest is not None and span[0] < latest[1] and latest[0] < span[1]:
                found.append(f"qubit {qubit}: groups {latest[2]} and {span[2]} hold it concurrently")
            if latest is None or span[1] > latest[1]:
                latest = span
    return found


def _dependency_violations(schedule: EventSchedule, circuit: LogicalCircuit) -> List[str]:
    found = []
    first_start: Dict[int, Fraction] = {}
    last_end: Dict[int, Fraction] = {}
    for interval in schedule.intervals:
        for gate_id in interval.gate_ids:
            first_start[gate_id] = min(first_start.get(gate_id, interval.start), interval.start)
            last_end[gate_id] = max(last_end.get(gate_id, interval.end), interval.end)
    for gate in circuit.gates:
        if gate.id not in first_start:
            found.append(f"gate {gate.id}: never scheduled")
    for gate_id, preds in circuit.predecessors().items():
        if gate_id not in first_start:
            continue
        for pred in preds:
            if pred in last_end and last_end[pred] > first_start[gate_id]:
                found.append(
                    f"gate {gate_id}: starts at {format_cycles(first_start[gate_id])} before "
                    f"predecessor {pred} ends at {format_cycles(last_end[pred])}"
                )
    return found


def check_schedule(
    schedule: EventSchedule,
    grid: Optional[LayoutGrid] = None,
    circuit: Optional[LogicalCircuit] = None,
) -> List[str]:
    """
    Validate a schedule.

    Checks cell exclusivity, A/B/C stage order per lock group, per-qubit
    lock exclusivity, the makespan, and with a circuit also completeness
    and dependency order.

    Returns:
        Human-readable violations; empty means valid
    """
    violations = _cell_violations(schedule, grid)
    violations += _stage_order_violations(schedule)
    violations += _qubit_violations(schedule)
    if circuit is not None:
        violations += _dependency_violations(schedule, circuit)
    if schedule.total_cycles != schedule.makespan():
        violations.append(
            f"makespan {format_cycles(schedule.makespan())} differs from reported total "
            f"{format_cycles(schedule.total_cycles)}"
        )
    return violations


def sort_key_for(circuit: LogicalCircuit) -> Callable[[Interval], Tuple[Fraction, int, int, int]]:
    """Replay order: start time, then program position, then stage."""
    rank = {Stage.A: 0, Stage.INPLACE: 0, Stage.B: 1, Stage.C: 2}

    def key(interval: Interval) -> Tuple[Fraction, int, int, int]:
        position = min((circuit.position(g) for g in interval.gate_ids), default=-1)
        return (interval.start, position, rank[interval.stage], interval.op_id)

    return key


def intervals_in_replay_order(schedule: EventSchedule, circuit: LogicalCircuit) -> Sequence[Interval]:
    return sorted(schedule.intervals, key=sort_key_for(circuit))

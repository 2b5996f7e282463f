"""
Slice-based executor.

Runs each packed group as one synchronized slice: a multi-target CNOT
sweep over the group's footprint (stage A), the target rotations
(stage B), and the same sweep again (stage C). Slices are separated by a
global grid reset.
"""

import itertools
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Dict, Iterator, List, Optional, Sequence, Tuple, Union

from .circuit import GateKind, LogicalCircuit
from .cost import CostConfig, batch_latency, merge_cost, required_orientations
from .exceptions import ConfigError, LayoutError
from .grouping import FanoutGroup, GroupMember, GroupPlan, PackedGate
from .layout import Coord, LayoutGrid, Orientation
from .logging import get_logger
from .rotation import (
    CultivationTracker,
    Regime,
    RotationJob,
    RotationSettings,
    realize_eft,
    realize_msc,
    realize_msd_group,
)
from .schedule import EventSchedule, Interval, Stage

ROTATION_KINDS = {Regime.EFT_INJECT: "inject", Regime.FFT_MSD: "t-route", Regime.FFT_MSC: "cultivate"}


@dataclass(frozen=True)
class SliceRow:
    index: int
    kind: str
    layer: int
    start: Fraction
    spans: Tuple[Fraction, Fraction, Fraction]
    group_index: Optional[int] = None
    stage_b_batches: int = 0

    @property
    def total(self) -> Fraction:
        return sum(self.spans, Fraction(0))


@dataclass
class SliceSchedule:
    slices: List[SliceRow]
    total_cycles: Fraction
    c_reset: Fraction
    intervals: List[Interval] = field(default_factory=list)
    orientations: Dict[Coord, Orientation] = field(default_factory=dict)
    counts: Dict[str, int] = field(default_factory=dict)

    def recomputed_total(self) -> Fraction:
        """Sum of slice totals plus one reset between consecutive slices."""
        if not self.slices:
            return Fraction(0)
        return sum((s.total for s in self.slices), Fraction(0)) + self.c_reset * (len(self.slices) - 1)

    def to_event_schedule(self) -> EventSchedule:
        return EventSchedule("slice", list(self.intervals), self.total_cycles, counts=dict(self.counts))


_Unit = Tuple[str, int, Union[FanoutGroup, PackedGate, None]]


class SliceExecutor:
    """
    Executes a packed group plan slice by slice on a private copy of the grid.

    Example:
        ```python
        plan = pack_groups(plan_circuit(circuit, grid, config), grid, config)
        schedule = SliceExecutor(circuit, plan, grid, config, RotationSettings()).run()
        ```
    """

    def __init__(
        self,
        circuit: LogicalCircuit,
        plan: GroupPlan,
        grid: LayoutGrid,
        config: CostConfig,
        settings: RotationSettings,
    ):
        for gate in circuit.gates:
            if gate.kind in (GateKind.CNOT, GateKind.MEASURE):
                raise ConfigError(f"Executors take C-Phase and single-qubit gates only (gate {gate.id} is {gate.kind.value})")
        self.circuit = circuit
        self.plan = plan
        self.grid = grid.copy()
        self.config = config
        self.settings = settings
        self.tracker = CultivationTracker()
        self.intervals: List[Interval] = []
        self._op_ids = itertools.count()
        self.logger = get_logger()

    def _units(self) -> Iterator[_Unit]:
        for number in range(len(self.circuit.commuting_layers)):
            if any(g.in_place for g in self.circuit.layer_gates(number)):
                yield ("inplace", number, None)
            for group in self.plan.groups:
                if group.layer == number:
                    yield ("group", number, group)
            for leftover in self.plan.leftovers:
                if self.circuit.layer_of(leftover.member.gate_id) == number:
                    yield ("leftover", number, leftover)

    def _record(self, stage: Stage, kind: str, start: Fraction, end: Fraction, cells: Sequence[Coord],
                gate_ids: Sequence[int], operands: Sequence[Tuple[int, ...]], group: str) -> None:
        self.intervals.append(Interval(
            next(self._op_ids), stage, kind, start, end, tuple(sorted(set(cells))), tuple(gate_ids),
            tuple(operands), group,
        ))

    def run(self) -> SliceSchedule:
        rows: List[SliceRow] = []
        time = Fraction(0)
        for index, (kind, layer, payload) in enumerate(self._units()):
            if index:
                time += self.config.c_reset
            if kind == "inplace":
                row = self._run_inplace(index, layer, time)
            elif kind == "group":
                row = self._run_group(index, layer, time, payload)  # type: ignore[arg-type]
            else:
                row = self._run_leftover(index, layer, time, payload)  # type: ignore[arg-type]
            self.logger.debug(
                "Slice executed", slice=index, kind=kind, start=str(row.start),
                span_a=str(row.spans[0]), span_b=str(row.spans[1]), span_c=str(row.spans[2]),
            )
            rows.append(row)
            time = row.start + row.total

        schedule = SliceSchedule(
            rows, time, self.config.c_reset, self.intervals, self.grid.orientations(),
            counts={
                "slices": len(rows),
                "groups": sum(1 for r in rows if r.kind == "group"),
                "packed": sum(len(g.packed) for g in self.plan.groups),
                "leftovers": len(self.plan.leftovers),
                "stage_b_batches": sum(r.stage_b_batches for r in rows),
            },
        )
        self.logger.info("Slice schedule complete", mode="slice", cycles=str(time), slices=len(rows))
        return schedule

    def _run_inplace(self, index: int, layer: int, start: Fraction) -> SliceRow:
        clock: Dict[int, Fraction] = {}
        for gate in self.circuit.layer_gates(layer):
            if not gate.in_place:
                continue
            begin = max([start] + [clock[q] for q in gate.qubits if q in clock])
            end = begin + self.config.in_place_cost(gate.kind)
            self._record(Stage.INPLACE, "inplace", begin, end, (), (gate.id,), (gate.qubits,), f"g{gate.id}")
            for q in gate.qubits:
                clock[q] = end
        span = max(clock.values(), default=start) - start
        return SliceRow(index, "inplace", layer, start, (Fraction(0), span, Fraction(0)))

    def _run_group(self, index: int, layer: int, start: Fraction, group: FanoutGroup) -> SliceRow:
        if group.footprint is None:
            raise LayoutError(f"Group {group.index} has no footprint; pack the plan first")
        paths: List[Tuple[GroupMember, Tuple[Coord, ...]]] = [
            (m, group.footprint.path(self.grid.coord_of(m.target))) for m in group.members
        ]
        paths += [(p.member, p.route.path) for p in group.packed]
        cells = set(group.footprint.tree_cells)
        for packed in group.packed:
            cells.update(packed.route.cells)
        return self._run_three_stage(index, layer, start, paths, cells, "fanout", group.index)

    def _run_leftover(self, index: int, layer: int, start: Fraction, leftover: PackedGate) -> SliceRow:
        return self._run_three_stage(
            index, layer, start, [(leftover.member, leftover.route.path)], set(leftover.route.cells), "p2p", None
        )

    def _sweep(self, paths: Sequence[Tuple[GroupMember, Tuple[Coord, ...]]]) -> Fraction:
        span = max(merge_cost(path, self.grid, self.config).total for _, path in paths)
        for _, path in paths:
            self.grid.set_orientations(required_orientations(path))
        return span

    def _run_three_stage(
        self,
        index: int,
        layer: int,
        start: Fraction,
        paths: List[Tuple[GroupMember, Tuple[Coord, ...]]],
        cells: set,
        kind: str,
        group_index: Optional[int],
    ) -> SliceRow:
        label = f"slice{index}"
        members = [m for m, _ in paths]
        gate_ids = [m.gate_id for m in members]
        operands = [(m.control, m.target) for m in members]

        span_a = self._sweep(paths)
        self._record(Stage.A, kind, start, start + span_a, cells, gate_ids, operands, label)
        self.tracker.reset(cells, start + span_a)

        t_b = start + span_a
        span_b, batches = self._stage_b(members, t_b, label)

        t_c = t_b + span_b
        span_c = self._sweep(paths)
        self._record(Stage.C, kind, t_c, t_c + span_c, cells, gate_ids, operands, label)
        self.tracker.reset(cells, t_c + span_c)
        return SliceRow(index, "group" if kind == "fanout" else "leftover", layer, start,
                        (span_a, span_b, span_c), group_index, batches)

    def _record_job(self, job: RotationJob, start: Fraction, label: str) -> None:
        self._record(Stage.B, ROTATION_KINDS[job.regime], start, start + job.duration, job.cells,
                     (job.gate_id,), ((job.target,),), label)  # type: ignore[arg-type]
        self.tracker.reset(job.cells, start + job.duration)
        self.grid.set_orientations(job.orientation_updates)

    def _stage_b(self, members: Sequence[GroupMember], start: Fraction, label: str) -> Tuple[Fraction, int]:
        """Realize the rotations; returns (span, number of batches or waves)."""
        jobs = [self.settings.job(m.target, -m.angle / 2, m.gate_id) for m in members]
        regime = Regime(self.settings.regime)

        if regime == Regime.FFT_MSD:
            batches, span = realize_msd_group(jobs, self.grid, self.config)
            t = start
            for batch in batches:
                for job in batch:
                    self._record_job(job, t, label)
                t += max(j.duration for j in batch) + self.config.c_reset
            return span, len(batches)

        pending = jobs
        maxima: List[Fraction] = []
        t = start
        while pending:
            claimed: set = set()
            wave: List[RotationJob] = []
            deferred: List[RotationJob] = []
            for job in pending:
                if regime == Regime.EFT_INJECT:
                    realized = realize_eft(job, self.grid, self.config, claimed)
                else:
                    realized = realize_msc(job, self.grid, self.config, t, self.tracker, claimed)
                if realized.stalled:
                    deferred.append(job)
                    continue
                wave.append(realized)
                claimed.update(realized.cells)
            if not wave:
                raise LayoutError(
                    f"Qubit {pending[0].target} has no adjacent ancilla for its rotation",
                    {"qubit": pending[0].target},
                )
            for job in wave:
                self._record_job(job, t, label)
            maxima.append(max(j.duration for j in wave))
            t += maxima[-1] + self.config.c_reset
            pending = deferred
        return batch_latency(maxima, self.config), len(maxima)


def execute_slices(
    circuit: LogicalCircuit,
    plan: GroupPlan,
    grid: LayoutGrid,
    config: CostConfig,
    settings: Union[RotationSettings, Regime, str],
) -> SliceSchedule:
    """
    Run a packed plan slice by slice.

    Args:
        circuit: Source circuit (supplies commuting layers and in-place gates)
        plan: Output of :func:`~latticesched.core.grouping.pack_groups`
        grid: Layout; left untouched (the executor works on a copy)
        config: Cost constants
        settings: Rotation regime or full rotation settings

    Returns:
        SliceSchedule
    """
    if not isinstance(settings, RotationSettings):
        settings = RotationSettings(regime=Regime(settings))
    return SliceExecutor(circuit, plan, grid, config, settings).run()

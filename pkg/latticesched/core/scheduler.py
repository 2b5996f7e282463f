"""
Pipelined event-driven scheduler.

Groups advance through stages A (multi-target CNOT sweep), B (target
rotations) and C (second sweep) independently, so stage A of one group
overlaps stage B of another. At every instant all completions are
processed first, then ready work is dispatched in priority order
C > B > A. Ready C-Phase gates are regrouped on the live grid each time:
the slowest routable gate anchors a group and gates sharing its control
join while the Steiner footprint can still be extended around current
occupancy. A group of one is a point-to-point route.
"""

import itertools
from dataclasses import dataclass, field, replace
from fractions import Fraction
from typing import Dict, FrozenSet, List, Optional, Sequence, Set, Tuple, Union

from .circuit import Gate, GateKind, LogicalCircuit
from .cost import CostConfig, merge_cost, required_orientations, rz_sequence_cost
from .events import Event, EventKind, EventQueue
from .exceptions import ConfigError, DeadlockError, LayoutError
from .grouping import GroupMember, choose_control
from .layout import Coord, LayoutGrid
from .logging import get_logger
from .rotation import (
    CultivationTracker,
    Regime,
    RotationJob,
    RotationSettings,
    realize_eft,
    realize_msc,
    select_ms_patch,
)
from .routing import SteinerBuilder, bfs_route
from .schedule import EventSchedule, Interval, Stage
from .slices import ROTATION_KINDS


@dataclass
class ActiveGroup:
    """A dynamically formed group between its stage-A dispatch and stage-C completion."""

    gid: int
    layer: int
    control: int
    members: List[GroupMember]
    paths: List[Tuple[GroupMember, Tuple[Coord, ...]]]
    cells: FrozenSet[Coord]
    state: str = "A"
    pending_jobs: List[RotationJob] = field(default_factory=list)
    running_jobs: int = 0

    @property
    def label(self) -> str:
        return f"G{self.gid}"

    @property
    def kind(self) -> str:
        return "fanout" if len(self.members) > 1 else "p2p"

    @property
    def qubits(self) -> Set[int]:
        return {self.control, *(m.target for m in self.members)}


class PipelineScheduler:
    """
    Discrete-event simulation of the pipelined executor.

    The scheduler owns a private copy of the grid; the caller's grid is
    never mutated.

    Example:
        ```python
        schedule = PipelineScheduler(circuit, grid, CostConfig(), RotationSettings()).run()
        schedule.total_cycles
        ```
    """

    def __init__(
        self,
        circuit: LogicalCircuit,
        grid: LayoutGrid,
        config: CostConfig,
        settings: RotationSettings,
    ):
        self.circuit = circuit
        self.grid = grid.copy()
        self.config = config
        self.settings = settings
        self.regime = Regime(settings.regime)
        self.logger = get_logger()

        self.preds = circuit.predecessors()
        self.done: Set[int] = set()
        self.started: Set[int] = set()
        self.locks: Dict[int, str] = {}
        self.groups: Dict[int, ActiveGroup] = {}
        self.tracker = CultivationTracker()
        self.intervals: List[Interval] = []
        self.dispatch_log: List[Tuple[Fraction, Stage, str]] = []
        self._op_ids = itertools.count()
        self._gids = itertools.count()
        self._dispatch_at: Optional[Fraction] = None
        self.cultivation_waits = 0

        self.queue = EventQueue()
        self.queue.subscribe(EventKind.ROUTE_COMPLETE, self._on_route_complete)
        self.queue.subscribe(EventKind.ROTATION_COMPLETE, self._on_rotation_complete)
        self.queue.subscribe(EventKind.CULTIVATION_READY, self._on_cultivation_ready)
        self.queue.subscribe(EventKind.DISPATCH, self._on_dispatch)

        self._check_feasible()

    def _check_feasible(self) -> None:
        reachable: Set[int] = set()
        for gate in self.circuit.gates:
            if gate.kind in (GateKind.CNOT, GateKind.MEASURE):
                raise ConfigError(f"Executors take C-Phase and single-qubit gates only (gate {gate.id} is {gate.kind.value})")
            if gate.kind == GateKind.CPHASE:
                for q in gate.qubits:
                    if not self.grid.ancilla_neighbors(self.grid.coord_of(q)):
                        raise LayoutError(f"Qubit {q} has no adjacent ancilla", {"qubit": q})
                src, dst = (self.grid.coord_of(q) for q in gate.qubits)
                if bfs_route(self.grid, src, dst, config=self.config) is None:
                    raise LayoutError(f"Gate {gate.id} cannot be routed on the layout", {"gate": gate.id})
                if self.regime == Regime.FFT_MSD and gate.qubits[1] not in reachable:
                    if select_ms_patch(dst, self.grid, self.config) is None:
                        raise LayoutError(
                            f"No magic-state patch is reachable from qubit {gate.qubits[1]}", {"qubit": gate.qubits[1]},
                        )
                    reachable.add(gate.qubits[1])

    @property
    def now(self) -> Fraction:
        return self.queue.now

    def _record(self, stage: Stage, kind: str, end: Fraction, cells: Sequence[Coord], gate_ids: Sequence[int],
                operands: Sequence[Tuple[int, ...]], group: str) -> int:
        op_id = next(self._op_ids)
        self.intervals.append(Interval(
            op_id, stage, kind, self.now, end, tuple(sorted(set(cells))), tuple(gate_ids), tuple(operands), group,
        ))
        self.dispatch_log.append((self.now, stage, group))
        return op_id

    def _reserve(self, cells: Sequence[Coord], op_id: int) -> None:
        conflicts = self.grid.reserve(cells, f"op{op_id}")
        if conflicts:
            raise LayoutError(f"Reservation conflict on {conflicts}", {"op": op_id})

    def _release(self, event: Event) -> None:
        self.grid.release(f"op{event.op_id}")
        self.tracker.reset(event.released, event.time)

    def _request_dispatch(self, time: Fraction) -> None:
        """Queue one dispatch at ``time``; completions at the same instant share it."""
        if self._dispatch_at != time:
            self._dispatch_at = time
            self.queue.push(Event(time, EventKind.DISPATCH, -1))

    # Event handlers

    def _on_route_complete(self, event: Event) -> None:
        self._release(event)
        self._request_dispatch(event.time)
        group = self.groups[event.payload["group"]]
        for _, path in group.paths:
            self.grid.set_orientations(required_orientations(path))
        if event.payload["stage"] == Stage.A:
            group.state = "B"
            group.pending_jobs = [self.settings.job(m.target, -m.angle / 2, m.gate_id) for m in group.members]
            return
        group.state = "DONE"
        for qubit in group.qubits:
            self.locks.pop(qubit, None)
        self.done.update(m.gate_id for m in group.members)
        del self.groups[group.gid]

    def _on_rotation_complete(self, event: Event) -> None:
        self._request_dispatch(event.time)
        if "gate" in event.payload:
            gate = self.circuit.gate(event.payload["gate"])
            for qubit in gate.qubits:
                self.locks.pop(qubit, None)
            self.done.add(gate.id)
            return
        self._release(event)
        group = self.groups[event.payload["group"]]
        self.grid.set_orientations(event.payload.get("orientation", {}))
        group.running_jobs -= 1
        if not group.pending_jobs and group.running_jobs == 0:
            group.state = "C_READY"

    def _on_cultivation_ready(self, event: Event) -> None:
        self.cultivation_waits += 1
        self.logger.debug("Cultivated state ready after a wait", op=event.op_id, time=str(event.time))

    def _on_dispatch(self, event: Event) -> None:
        self._dispatch_at = None
        self._dispatch()

    # Dispatch

    def _push(self, end: Fraction, kind: EventKind, op_id: int, released: Sequence[Coord] = (), **payload) -> None:
        self.queue.push(Event(end, kind, op_id, tuple(sorted(set(released))), payload=payload))

    def _dispatch(self) -> None:
        self._dispatch_stage_c()
        self._dispatch_stage_b()
        self._dispatch_in_place()
        self._dispatch_stage_a()

    def _dispatch_stage_c(self) -> None:
        for gid in sorted(self.groups):
            group = self.groups[gid]
            if group.state != "C_READY":
                continue
            if any(not self.grid.is_free(c) for c in group.cells):
                continue
            span = max(merge_cost(path, self.grid, self.config).total for _, path in group.paths)
            op_id = self._record(Stage.C, group.kind, self.now + span, group.cells,
                                 [m.gate_id for m in group.members],
                                 [(m.control, m.target) for m in group.members], group.label)
            self._reserve(list(group.cells), op_id)
            self._push(self.now + span, EventKind.ROUTE_COMPLETE, op_id, group.cells, group=gid, stage=Stage.C)
            group.state = "C"
            self.logger.debug("Dispatched stage C", group=group.label, time=str(self.now), span=str(span))

    def _realize(self, job: RotationJob) -> Optional[RotationJob]:
        if self.regime == Regime.EFT_INJECT:
            realized = realize_eft(job, self.grid, self.config)
        elif self.regime == Regime.FFT_MSC:
            realized = realize_msc(job, self.grid, self.config, self.now, self.tracker)
        else:
            dec = job.decomposition
            if dec.n_t == 0:  # type: ignore[union-attr]
                return replace(job, duration=rz_sequence_cost(dec, 0, self.config))  # type: ignore[arg-type]
            selection = select_ms_patch(self.grid.coord_of(job.target), self.grid, self.config)
            if selection is None:
                return None
            route = selection.route
            realized = replace(
                job,
                route=route,
                duration=rz_sequence_cost(dec, route.cost.total, self.config),  # type: ignore[arg-type]
                orientation_updates=required_orientations(route.path),
            )
        return None if realized.stalled else realized

    def _dispatch_stage_b(self) -> None:
        for gid in sorted(self.groups):
            group = self.groups[gid]
            if group.state != "B":
                continue
            waiting = []
            for job in group.pending_jobs:
                realized = self._realize(job)
                if realized is None:
                    waiting.append(job)
                    continue
                end = self.now + realized.duration
                op_id = self._record(Stage.B, ROTATION_KINDS[self.regime], end, realized.cells,
                                     [realized.gate_id], [(realized.target,)], group.label)  # type: ignore[list-item]
                self._reserve(realized.cells, op_id)
                self._push(end, EventKind.ROTATION_COMPLETE, op_id, realized.cells, group=gid,
                           orientation=realized.orientation_updates)
                if realized.waits and realized.waits[0] > 0:
                    self._push(self.now + realized.waits[0], EventKind.CULTIVATION_READY, op_id)
                group.running_jobs += 1
            group.pending_jobs = waiting

    def _ready(self, gate: Gate) -> bool:
        return (
            gate.id not in self.started
            and all(p in self.done for p in self.preds[gate.id])
            and not any(q in self.locks for q in gate.qubits)
        )

    def _dispatch_in_place(self) -> None:
        for gate in self.circuit.gates:
            if not gate.in_place or not self._ready(gate):
                continue
            label = f"g{gate.id}"
            for qubit in gate.qubits:
                self.locks[qubit] = label
            self.started.add(gate.id)
            end = self.now + self.config.in_place_cost(gate.kind)
            op_id = self._record(Stage.INPLACE, "inplace", end, (), [gate.id], [gate.qubits], label)
            self._push(end, EventKind.ROTATION_COMPLETE, op_id, gate=gate.id)

    def _dispatch_stage_a(self) -> None:
        ready = [g for g in self.circuit.gates if g.kind == GateKind.CPHASE and self._ready(g)]
        for layer in sorted({self.circuit.layer_of(g.id) for g in ready}):
            candidates = [g for g in ready if self.circuit.layer_of(g.id) == layer and self._ready(g)]
            while candidates:
                if not self._form_group(layer, candidates):
                    break
                candidates = [g for g in candidates if self._ready(g)]

    def _form_group(self, layer: int, candidates: List[Gate]) -> bool:
        """Form and dispatch one group from ``candidates``; False when nothing is routable."""
        latency: Dict[int, Fraction] = {}
        for gate in candidates:
            route = bfs_route(self.grid, self.grid.coord_of(gate.qubits[0]), self.grid.coord_of(gate.qubits[1]),
                              config=self.config, gate_id=gate.id)
            if route is not None:
                latency[gate.id] = route.cost.total
        routable = [g for g in candidates if g.id in latency]
        if not routable:
            return False

        anchor = min(routable, key=lambda g: (-latency[g.id], g.id))
        control = choose_control(anchor, routable, latency)
        builder = SteinerBuilder(self.grid, self.grid.coord_of(control))
        chosen: List[Gate] = []
        joiners = sorted(
            (g for g in routable if control in g.qubits and g.id != anchor.id),
            key=lambda g: (-latency[g.id], g.id),
        )
        for gate in [anchor, *joiners]:
            target = gate.other(control)
            if any(g.other(control) == target for g in chosen):
                continue
            if builder.attach(self.grid.coord_of(target)):
                chosen.append(gate)
        if not chosen:
            return False

        footprint = builder.footprint()
        members = [GroupMember(g.id, control, g.other(control), g.angle, latency[g.id]) for g in chosen]  # type: ignore[arg-type]
        paths = [(m, footprint.path(self.grid.coord_of(m.target))) for m in members]
        group = ActiveGroup(next(self._gids), layer, control, members, paths, footprint.tree_cells)
        self.groups[group.gid] = group
        for qubit in group.qubits:
            self.locks[qubit] = group.label
        self.started.update(m.gate_id for m in members)

        span = max(merge_cost(path, self.grid, self.config).total for _, path in paths)
        op_id = self._record(Stage.A, group.kind, self.now + span, group.cells, [m.gate_id for m in members],
                             [(m.control, m.target) for m in members], group.label)
        self._reserve(list(group.cells), op_id)
        self._push(self.now + span, EventKind.ROUTE_COMPLETE, op_id, group.cells, group=group.gid, stage=Stage.A)
        self.logger.debug("Dispatched stage A", group=group.label, time=str(self.now), targets=len(members),
                          span=str(span))
        return True

    def _dump(self) -> Dict[str, object]:
        return {
            "time": str(self.now),
            "done": len(self.done),
            "gates": len(self.circuit.gates),
            "groups": {g.label: g.state for g in self.groups.values()},
            "locks": {str(q): owner for q, owner in sorted(self.locks.items())},
            "occupied": sorted(list(c) for c in self.grid.occupied()),
        }

    def run(self) -> EventSchedule:
        self._request_dispatch(Fraction(0))
        while len(self.done) < len(self.circuit.gates):
            if self.queue.deliver_next() is None:
                raise DeadlockError("No dispatchable work while gates remain pending", self._dump())
        total = max((i.end for i in self.intervals), default=Fraction(0))
        group_labels = {i.group for i in self.intervals if i.stage == Stage.A}
        fanout = {i.group for i in self.intervals if i.stage == Stage.A and i.kind == "fanout"}
        schedule = EventSchedule(
            "pipelined",
            sorted(self.intervals, key=lambda i: i.op_id),
            total,
            self.dispatch_log,
            counts={
                "groups": len(group_labels), "fanout_groups": len(fanout), "events": len(self.queue.history),
                "cultivation_waits": self.cultivation_waits,
            },
        )
        self.logger.info("Pipelined schedule complete", mode="pipelined", cycles=str(total), groups=len(group_labels))
        return schedule


def execute_pipeline(
    circuit: LogicalCircuit,
    grid: LayoutGrid,
    config: CostConfig,
    settings: Union[RotationSettings, Regime, str],
) -> EventSchedule:
    """
    Run the pipelined scheduler to quiescence.

    Raises:
        LayoutError: a gate or rotation can never be realized on the layout
        DeadlockError: pending work with nothing dispatchable
    """
    if not isinstance(settings, RotationSettings):
        settings = RotationSettings(regime=Regime(settings))
    return PipelineScheduler(circuit, grid, config, settings).run()

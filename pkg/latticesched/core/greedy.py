"""
Round-based greedy baseline compiler.

Every C-Phase is serialized into a dependent chain of routed operations:
a CNOT, the target rotation (one injection under EFT, one operation per
synthesized gate under FFT), and a second CNOT. Each round sorts the
executable operations by minimum-remaining-values key and routes them one
by one on a fresh grid, committing the first feasible path and blocking
its cells. The MRV key of each pick is taken against the cells still free
at that point of the round. In-place gates that directly follow a committed
operation in its chain run back to back after it within the same round.
Rounds are separated by a grid reset, so the total is the sum
of round latencies plus one reset between consecutive rounds.
"""

import itertools
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Dict, FrozenSet, List, Optional, Set, Tuple, Union

import networkx as nx

from .circuit import GateKind, LogicalCircuit
from .cost import CostConfig, local_merge_cost, local_orientation, merge_cost, required_orientations
from .exceptions import ConfigError, DeadlockError, LayoutError
from .layout import Coord, LayoutGrid, Orientation, manhattan
from .logging import get_logger
from .rotation import CultivationTracker, Regime, RotationSettings, select_ms_patch
from .routing import Route, shortest_cells
from .schedule import EventSchedule, Interval, Stage

OP_KINDS = ("cnot", "inject", "t-route", "cultivate", "inplace")


@dataclass(frozen=True)
class GreedyOp:
    """One routed (or in-place) operation of the serialized circuit."""

    id: int
    kind: str
    gate_id: int
    qubits: Tuple[int, ...]
    stage: Stage
    gate_kind: Optional[GateKind] = None
    chain_start: bool = True
    chain_end: bool = True


@dataclass(frozen=True, order=True)
class MrvKey:
    num_feasible_pairs: int
    neg_min_distance: int
    neg_criticality: int


@dataclass(frozen=True)
class GreedyCommit:
    op: GreedyOp
    cost: Fraction
    cells: Tuple[Coord, ...] = ()
    route: Optional[Route] = None
    offset: Fraction = Fraction(0)


@dataclass
class GreedyRound:
    index: int
    start: Fraction
    committed: List[GreedyCommit] = field(default_factory=list)
    latency: Fraction = Fraction(0)
    free_mask: FrozenSet[Coord] = frozenset()
    order: List[int] = field(default_factory=list)


@dataclass
class GreedyResult:
    rounds: List[GreedyRound]
    total_cycles: Fraction
    c_reset: Fraction
    schedule: EventSchedule

    def recomputed_total(self) -> Fraction:
        """``sum(L_k) + (K - 1) * c_reset``."""
        if not self.rounds:
            return Fraction(0)
        return sum((r.latency for r in self.rounds), Fraction(0)) + self.c_reset * (len(self.rounds) - 1)


def build_ops(circuit: LogicalCircuit, settings: RotationSettings) -> Tuple[List[GreedyOp], nx.DiGraph]:
    """
    Serialize a circuit into greedy operations and their dependency DAG.

    Returns:
        ``(ops, graph)`` where graph edges point from predecessor op to successor op
    """
    regime = Regime(settings.regime)
    counter = itertools.count()
    ops: List[GreedyOp] = []
    first: Dict[int, int] = {}
    last: Dict[int, int] = {}
    graph = nx.DiGraph()

    for gate in circuit.gates:
        if gate.kind == GateKind.MEASURE:
            raise ConfigError(f"Gate {gate.id}: measurements are not schedulable")
        if gate.kind == GateKind.CPHASE:
            control, target = gate.qubits
            chain = [(Stage.A, "cnot", (control, target), None)]
            if regime == Regime.EFT_INJECT:
                chain.append((Stage.B, "inject", (target,), None))
            else:
                t_kind = "t-route" if regime == Regime.FFT_MSD else "cultivate"
                for symbol in settings.decompose(-gate.angle / 2).sequence:  # type: ignore[operator]
                    if symbol == "T":
                        chain.append((Stage.B, t_kind, (target,), None))
                    else:
                        chain.append((Stage.B, "inplace", (target,), GateKind(symbol)))
            chain.append((Stage.C, "cnot", (control, target), None))
        elif gate.kind == GateKind.CNOT:
            chain = [(Stage.A, "cnot", gate.qubits, None)]
        else:
            chain = [(Stage.INPLACE, "inplace", gate.qubits, gate.kind)]

        chain_ops = [
            GreedyOp(next(counter), kind, gate.id, qubits, stage, gate_kind, i == 0, i == len(chain) - 1)
            for i, (stage, kind, qubits, gate_kind) in enumerate(chain)
        ]
        for op in chain_ops:
            graph.add_node(op.id)
        for before, after in zip(chain_ops, chain_ops[1:]):
            graph.add_edge(before.id, after.id)
        ops.extend(chain_ops)
        first[gate.id], last[gate.id] = chain_ops[0].id, chain_ops[-1].id

    for gate_id, preds in circuit.predecessors().items():
        graph.add_edges_from((last[p], first[gate_id]) for p in preds)
    return ops, graph


def criticality(graph: nx.DiGraph) -> Dict[int, int]:
    """Number of operations on the longest dependency chain starting at each op."""
    kappa: Dict[int, int] = {}
    for node in reversed(list(nx.topological_sort(graph))):
        kappa[node] = 1 + max((kappa[s] for s in graph.successors(node)), default=0)
    return kappa


def _free_neighbors(grid: LayoutGrid, coord: Coord, free_mask: FrozenSet[Coord]) -> List[Coord]:
    return [c for c in grid.ancilla_neighbors(coord) if c in free_mask]


def feasible_pairs(op: GreedyOp, grid: LayoutGrid, free_mask: FrozenSet[Coord]) -> List[Tuple[Coord, Coord]]:
    """Attachment pairs whose cells are both free; single-cell attachments pair with themselves."""
    if op.kind == "cnot":
        a_side = _free_neighbors(grid, grid.coord_of(op.qubits[0]), free_mask)
        b_side = _free_neighbors(grid, grid.coord_of(op.qubits[1]), free_mask)
        return [(a, b) for a in a_side for b in b_side]
    target = grid.coord_of(op.qubits[0])
    if op.kind == "t-route":
        ms_side = sorted({
            c for m in grid.ms_patches if m in free_mask for c in _free_neighbors(grid, m, free_mask)
        })
        return [(a, b) for a in ms_side for b in _free_neighbors(grid, target, free_mask)]
    if op.kind in ("inject", "cultivate"):
        return [(c, c) for c in _free_neighbors(grid, target, free_mask)]
    return []


def compute_mrv_key(op: GreedyOp, grid: LayoutGrid, free_mask: FrozenSet[Coord], criticality: int = 1) -> MrvKey:
    """
    Minimum-remaining-values key: fewest feasible pairs, then farthest, then most critical.

    Example:
        ```python
        key = compute_mrv_key(op, grid, frozenset(grid.ancilla), criticality=3)
        ```
    """
    pairs = feasible_pairs(op, grid, free_mask)
    if not pairs:
        return MrvKey(0, 0, -criticality)
    return MrvKey(len(pairs), -min(manhattan(a, b) for a, b in pairs), -criticality)


class GreedyCompiler:
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
        self.ops, self.graph = build_ops(circuit, settings)
        self.kappa = criticality(self.graph)
        self.by_id = {op.id: op for op in self.ops}
        self.done: Set[int] = set()
        # remaining-predecessor counts; an op joins ``ready`` when its count hits zero
        self.waiting: Dict[int, int] = {n: self.graph.in_degree(n) for n in self.graph.nodes}
        self.ready: Set[int] = {n for n, count in self.waiting.items() if count == 0}
        self.locks: Dict[int, int] = {}
        self.tracker = CultivationTracker()
        self.intervals: List[Interval] = []
        self.logger = get_logger()

    def _executable(self, op: GreedyOp) -> bool:
        if op.id not in self.ready:
            return False
        return all(self.locks.get(q, op.gate_id) == op.gate_id for q in self.circuit.gate(op.gate_id).qubits)

    def _frontier(self) -> List[GreedyOp]:
        """Ready ops whose qubits are free or held by their own gate, in id order."""
        return [self.by_id[i] for i in sorted(self.ready) if self._executable(self.by_id[i])]

    def _complete(self, op: GreedyOp) -> None:
        self.done.add(op.id)
        self.ready.discard(op.id)
        self._unlock(op)
        for succ in self.graph.successors(op.id):
            self.waiting[succ] -= 1
            if self.waiting[succ] == 0:
                self.ready.add(succ)

    def _lock(self, op: GreedyOp) -> None:
        for q in self.circuit.gate(op.gate_id).qubits:
            self.locks[q] = op.gate_id

    def _unlock(self, op: GreedyOp) -> None:
        if op.chain_end:
            for q in self.circuit.gate(op.gate_id).qubits:
                if self.locks.get(q) == op.gate_id:
                    del self.locks[q]

    def _label(self, op: GreedyOp) -> str:
        gate = self.circuit.gate(op.gate_id)
        return f"cp{gate.id}" if gate.kind == GateKind.CPHASE else f"g{gate.id}"

    def _record(self, commit: GreedyCommit, start: Fraction) -> None:
        op = commit.op
        begin = start + commit.offset
        self.intervals.append(Interval(
            op.id, op.stage, op.kind, begin, begin + commit.cost, tuple(sorted(set(commit.cells))),
            (op.gate_id,), (op.qubits,), self._label(op),
        ))

    def _in_place_cost(self, op: GreedyOp) -> Fraction:
        return self.config.in_place_cost(op.gate_kind)  # type: ignore[arg-type]

    def _commit_zero_cost(self, time: Fraction) -> None:
        """Commit frontier ops that are zero-cost in-place gates at ``time`` until none remain."""
        while True:
            batch = [op for op in self._frontier() if op.kind == "inplace" and self._in_place_cost(op) == 0]
            if not batch:
                return
            for op in batch:
                self._record(GreedyCommit(op, Fraction(0)), time)
                self._complete(op)

    def _chain_tail(self, commit: GreedyCommit) -> List[GreedyCommit]:
        """In-place ops that directly follow ``commit`` in its chain, charged back to back after it."""
        tail: List[GreedyCommit] = []
        current, offset = commit.op, commit.offset + commit.cost
        while not current.chain_end:
            following = self.by_id[current.id + 1]
            if following.kind != "inplace" or following.id not in self.ready:
                break
            folded = GreedyCommit(following, self._in_place_cost(following), offset=offset)
            self._complete(following)
            tail.append(folded)
            current, offset = following, offset + folded.cost
        return tail

    def _try_route(self, op: GreedyOp, start: Fraction) -> Optional[GreedyCommit]:
        grid, config = self.grid, self.config
        if op.kind == "inplace":
            return GreedyCommit(op, self._in_place_cost(op))
        if op.kind == "cnot":
            src, dst = grid.coord_of(op.qubits[0]), grid.coord_of(op.qubits[1])
            pairs = sorted(feasible_pairs(op, grid, self._free_mask()), key=lambda p: (manhattan(*p), p))
            for a, b in pairs:
                cells = shortest_cells(grid, [a], [b])
                if cells is None:
                    continue
                cost = merge_cost([src, *cells, dst], grid, config)
                return GreedyCommit(op, cost.total, tuple(cells), Route(op.gate_id, (src, dst), tuple(cells), cost))
            return None

        target = grid.coord_of(op.qubits[0])
        free = [c for c in grid.ancilla_neighbors(target) if grid.is_free(c)]
        if op.kind == "inject":
            return GreedyCommit(op, config.t_rz_inject, (min(free),)) if free else None
        if op.kind == "t-route":
            selection = select_ms_patch(target, grid, config)
            if selection is None:
                return None
            route = selection.route
            return GreedyCommit(op, route.cost.total, (route.endpoints[0], *route.cells), route)
        if not free:
            return None
        site = min(free, key=lambda c: (self.tracker.ready_at(c, config), c))
        wait = max(Fraction(0), self.tracker.ready_at(site, config) - start)
        return GreedyCommit(op, wait + local_merge_cost(target, site, grid, config).total, (site,))

    def _free_mask(self) -> FrozenSet[Coord]:
        """Ancilla and MS cells not yet reserved in the current round."""
        grid = self.grid
        return frozenset(c for c in itertools.chain(grid.ancilla, grid.ms_patches) if grid.is_free(c))

    def _orientation_updates(self, commit: GreedyCommit) -> Dict[Coord, Orientation]:
        if commit.route is not None:
            return required_orientations(commit.route.path)
        if commit.op.kind == "cultivate":
            return {commit.cells[0]: local_orientation(self.grid.coord_of(commit.op.qubits[0]), commit.cells[0])}
        return {}

    def _run_round(self, index: int, start: Fraction) -> GreedyRound:
        candidates = self._frontier()
        round_ = GreedyRound(index, start)
        considered = len(candidates)

        while candidates:
            free_mask = self._free_mask()
            op = min(
                candidates,
                key=lambda o: (compute_mrv_key(o, self.grid, free_mask, self.kappa[o.id]), o.id),
            )
            candidates.remove(op)
            if not self._executable(op):
                continue
            round_.order.append(op.id)
            commit = self._try_route(op, start)
            if commit is None:
                continue
            conflicts = self.grid.reserve(commit.cells, f"op{op.id}")
            if conflicts:
                raise LayoutError(f"Greedy reservation conflict on {conflicts}", {"op": op.id})
            self._lock(op)
            round_.committed.append(commit)

        round_.free_mask = self._free_mask()
        if not round_.committed:
            raise LayoutError(
                f"No operation of round {index} is routable on an empty grid",
                {"ops": list(round_.order)},
            )
        for commit in list(round_.committed):
            self._record(commit, start)
            self._complete(commit.op)
            freed = self.grid.release(f"op{commit.op.id}")
            self.tracker.reset(freed, start + commit.cost)
            self.grid.set_orientations(self._orientation_updates(commit))
            for folded in self._chain_tail(commit):
                self._record(folded, start)
                round_.committed.append(folded)
        round_.latency = max(c.offset + c.cost for c in round_.committed)
        self.logger.debug(
            "Greedy round committed", round=index, start=str(start), latency=str(round_.latency),
            committed=len(round_.committed), executable=considered,
        )
        return round_

    def run(self) -> GreedyResult:
        rounds: List[GreedyRound] = []
        boundary = Fraction(0)
        while True:
            self._commit_zero_cost(boundary)
            if len(self.done) == len(self.ops):
                break
            if not self._frontier():
                raise DeadlockError(
                    "Greedy compiler has pending operations but none is executable",
                    {"done": len(self.done), "ops": len(self.ops), "locks": {str(q): g for q, g in self.locks.items()}},
                )
            start = boundary + self.config.c_reset if rounds else Fraction(0)
            round_ = self._run_round(len(rounds), start)
            rounds.append(round_)
            boundary = start + round_.latency

        total = boundary
        schedule = EventSchedule(
            "greedy", sorted(self.intervals, key=lambda i: i.op_id), total,
            counts={"rounds": len(rounds), "operations": len(self.ops)},
        )
        result = GreedyResult(rounds, total, self.config.c_reset, schedule)
        self.logger.info("Greedy compilation complete", mode="greedy", cycles=str(total), rounds=len(rounds))
        return result


def greedy_compile(
    circuit: LogicalCircuit,
    grid: LayoutGrid,
    config: CostConfig,
    settings: Union[RotationSettings, Regime, str],
) -> GreedyResult:
    """
    Compile ``circuit`` with the round-based greedy baseline.

    Args:
        circuit: Circuit over placed qubits (C-Phase, CNOT and single-qubit gates)
        grid: Layout; left untouched
        config: Cost constants shared with the other executors
        settings: Rotation regime or full rotation settings

    Returns:
        GreedyResult with rounds, total cycles and the lowered schedule

    Raises:
        LayoutError: an operation cannot be routed even on an empty grid
    """
    if not isinstance(settings, RotationSettings):
        settings = RotationSettings(regime=Regime(settings))
    return GreedyCompiler(circuit, grid, config, settings).run()

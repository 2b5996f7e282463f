"""
Dense-matrix oracle for small circuits.

Builds full unitaries with numpy (qubit 0 is the most significant bit),
compares them up to global phase, and replays executor schedules back
into circuits so every executor can be checked for semantic preservation.
"""

import cmath
import math
from dataclasses import dataclass
from typing import Dict, List, Sequence, Set, Tuple

import numpy as np

from .circuit import Gate, GateKind, LogicalCircuit
from .exceptions import OracleError
from .schedule import EventSchedule, Stage, intervals_in_replay_order

MAX_QUBITS = 8
TOLERANCE = 1e-9

_H = np.array([[1, 1], [1, -1]], dtype=complex) / math.sqrt(2)
_CNOT = np.array([[1, 0, 0, 0], [0, 1, 0, 0], [0, 0, 0, 1], [0, 0, 1, 0]], dtype=complex)


def rz_matrix(angle: float) -> np.ndarray:
    return np.diag([cmath.exp(-0.5j * angle), cmath.exp(0.5j * angle)])


def gate_matrix(gate: Gate) -> np.ndarray:
    """Matrix of ``gate`` on its own operands, first operand most significant."""
    kind = gate.kind
    if kind == GateKind.H:
        return _H
    if kind == GateKind.S:
        return np.diag([1, 1j])
    if kind == GateKind.T:
        return np.diag([1, cmath.exp(0.25j * math.pi)])
    if kind == GateKind.RZ:
        return rz_matrix(gate.angle)  # type: ignore[arg-type]
    if kind == GateKind.CPHASE:
        return np.diag([1, 1, 1, cmath.exp(1j * gate.angle)])  # type: ignore[operator]
    if kind == GateKind.CNOT:
        return _CNOT
    raise OracleError(f"No unitary for {kind.value} gate {gate.id}")


@dataclass(frozen=True)
class UnitaryMatrix:
    num_qubits: int
    matrix: np.ndarray

    @property
    def dim(self) -> int:
        return 1 << self.num_qubits

    def is_unitary(self, tol: float = TOLERANCE) -> bool:
        product = self.matrix @ self.matrix.conj().T
        return bool(np.max(np.abs(product - np.eye(self.dim))) < tol)

    def equivalent(self, other: "UnitaryMatrix", tol: float = TOLERANCE) -> Tuple[bool, float]:
        return equal_up_to_global_phase(self.matrix, other.matrix, tol)


def _apply(state: np.ndarray, matrix: np.ndarray, axes: Sequence[int]) -> np.ndarray:
    k = len(axes)
    tensor = matrix.reshape((2,) * (2 * k))
    state = np.tensordot(tensor, state, axes=(list(range(k, 2 * k)), list(axes)))
    return np.moveaxis(state, list(range(k)), list(axes))


def _apply_gate(state: np.ndarray, gate: Gate, index: Dict[int, int]) -> np.ndarray:
    for qubit, angle in gate.local_phases:
        state = _apply(state, rz_matrix(angle), [index[qubit]])
    return _apply(state, gate_matrix(gate), [index[q] for q in gate.qubits])


def _unitary(gates: Sequence[Gate], index: Dict[int, int], n: int) -> np.ndarray:
    dim = 1 << n
    state = np.eye(dim, dtype=complex).reshape((2,) * n + (dim,))
    for gate in gates:
        state = _apply_gate(state, gate, index)
    return state.reshape(dim, dim)


def circuit_unitary(circuit: LogicalCircuit) -> UnitaryMatrix:
    """
    Ordered product of gate embeddings.

    Raises:
        OracleError: more than ``MAX_QUBITS`` qubits, or a gate without a unitary
    """
    n = circuit.num_qubits
    if n > MAX_QUBITS:
        raise OracleError(f"Oracle supports at most {MAX_QUBITS} qubits, circuit has {n}")
    return UnitaryMatrix(n, _unitary(circuit.gates, {q: q for q in range(n)}, n))


def equal_up_to_global_phase(a: np.ndarray, b: np.ndarray, tol: float = TOLERANCE) -> Tuple[bool, float]:
    """
    Compare two matrices after aligning the phase of the first nonzero entry of ``a``.

    Returns:
        ``(equal, max_elementwise_deviation)``
    """
    if a.shape != b.shape:
        return False, math.inf
    flat_a, flat_b = a.ravel(), b.ravel()
    nonzero = np.flatnonzero(np.abs(flat_a) > tol)
    if nonzero.size == 0:
        deviation = float(np.max(np.abs(flat_b), initial=0.0))
        return deviation < tol, deviation
    pivot = nonzero[0]
    if abs(flat_b[pivot]) <= tol:
        return False, float(abs(flat_a[pivot]))
    phase = flat_b[pivot] / flat_a[pivot]
    phase /= abs(phase)
    deviation = float(np.max(np.abs(flat_a * phase - flat_b)))
    return deviation < tol, deviation


def check_commute(first: Gate, second: Gate, tol: float = TOLERANCE) -> bool:
    """True iff the two gates' unitaries commute on their joint support."""
    support = sorted(set(first.qubits) | set(second.qubits))
    if len(support) > MAX_QUBITS:
        raise OracleError(f"Joint support of {len(support)} qubits exceeds {MAX_QUBITS}")
    index = {q: i for i, q in enumerate(support)}
    n = len(support)
    forward = _unitary([first, second], index, n)
    backward = _unitary([second, first], index, n)
    return bool(np.max(np.abs(forward - backward)) < tol)


def replay_schedule(schedule: EventSchedule, circuit: LogicalCircuit) -> LogicalCircuit:
    """
    Rebuild the gate sequence an executor actually ran.

    Intervals are walked by start time (ties by program position, then
    stage). A C-Phase contributes its first CNOT (with the companion phases)
    at stage A, the target rotation at its first stage-B interval and the
    second CNOT at stage C. Any other gate contributes itself once.
    """
    gates: List[Gate] = []
    emitted: Set[Tuple[int, Stage]] = set()

    def emit(kind: GateKind, qubits: Tuple[int, ...], angle=None, origin=None, phases=()) -> None:
        gates.append(Gate(len(gates), kind, qubits, angle, origin, phases))

    for interval in intervals_in_replay_order(schedule, circuit):
        for gate_id, operands in zip(interval.gate_ids, interval.operands):
            gate = circuit.gate(gate_id)
            if gate.kind != GateKind.CPHASE:
                if (gate_id, Stage.INPLACE) not in emitted:
                    emitted.add((gate_id, Stage.INPLACE))
                    emit(gate.kind, gate.qubits, gate.angle, gate_id, gate.local_phases)
                continue
            half = gate.angle / 2  # type: ignore[operator]
            if interval.stage == Stage.A and (gate_id, Stage.A) not in emitted:
                control, target = operands
                emit(GateKind.CNOT, (control, target), origin=gate_id, phases=((control, half), (target, half)))
                emitted.add((gate_id, Stage.A))
            elif interval.stage == Stage.B and (gate_id, Stage.B) not in emitted:
                emit(GateKind.RZ, (operands[-1],), -half, gate_id)
                emitted.add((gate_id, Stage.B))
            elif interval.stage == Stage.C and (gate_id, Stage.C) not in emitted:
                control, target = operands
                if (gate_id, Stage.B) not in emitted:
                    emit(GateKind.RZ, (target,), -half, gate_id)
                    emitted.add((gate_id, Stage.B))
                emit(GateKind.CNOT, (control, target), origin=gate_id)
                emitted.add((gate_id, Stage.C))
    return LogicalCircuit.from_gates(circuit.num_qubits, gates, f"{circuit.name}-replay")


def verify_schedule(schedule: EventSchedule, circuit: LogicalCircuit, tol: float = TOLERANCE) -> Tuple[bool, float]:
    """
    Check that a schedule replays to the source circuit's unitary.

    Returns:
        ``(equal, max_deviation)``

    Raises:
        OracleError: the circuit is too large for the dense oracle
    """
    source = circuit_unitary(circuit)
    replayed = circuit_unitary(replay_schedule(schedule, circuit))
    return source.equivalent(replayed, tol)

"""
Logical circuit representation.

Holds the gate model shared by every compiler pass, the C-Phase
decomposition, the benchmark generators (QAOA cost layer, QFT) and the
line-oriented circuit file codec.
"""

import math
import re
from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path
from typing import Dict, FrozenSet, Iterable, List, Optional, Sequence, Tuple, Union

import networkx as nx

TWO_PI = 2 * math.pi

# Default QAOA schedule parameters (depth p=1). Cycle accounting does not
# depend on the angles beyond the exact-T special case in synthesis.
DEFAULT_GAMMA = 0.35
DEFAULT_BETA = 0.6


class GateKind(str, Enum):
    """Supported logical gate kinds."""

    CPHASE = "CP"
    CNOT = "CNOT"
    RZ = "RZ"
    H = "H"
    S = "S"
    T = "T"
    MEASURE = "MEASURE"


TWO_QUBIT_KINDS = frozenset({GateKind.CPHASE, GateKind.CNOT})
ANGLE_KINDS = frozenset({GateKind.CPHASE, GateKind.RZ})
DIAGONAL_KINDS = frozenset({GateKind.CPHASE, GateKind.RZ, GateKind.S, GateKind.T})


@dataclass(frozen=True)
class Gate:
    """
    A single logical gate.

    ``local_phases`` lists in-place Rz rotations ``(qubit, angle)`` applied
    immediately before the gate; they cost no routing cycles.
    """

    id: int
    kind: GateKind
    qubits: Tuple[int, ...]
    angle: Optional[float] = None
    origin: Optional[int] = None
    local_phases: Tuple[Tuple[int, float], ...] = ()

    def __post_init__(self) -> None:
        object.__setattr__(self, "kind", GateKind(self.kind))
        object.__setattr__(self, "qubits", tuple(int(q) for q in self.qubits))
        arity = 2 if self.kind in TWO_QUBIT_KINDS else 1
        if len(self.qubits) != arity:
            raise ValueError(f"{self.kind.value} gate {self.id} needs {arity} qubit(s), got {self.qubits}")
        if arity == 2 and self.qubits[0] == self.qubits[1]:
            raise ValueError(f"Gate {self.id} references qubit {self.qubits[0]} twice")
        if any(q < 0 for q in self.qubits):
            raise ValueError(f"Gate {self.id} has a negative qubit id")
        if self.kind in ANGLE_KINDS:
            if self.angle is None:
                raise ValueError(f"{self.kind.value} gate {self.id} requires an angle")
            _check_angle(self.angle, self.id)
        elif self.angle is not None:
            raise ValueError(f"{self.kind.value} gate {self.id} takes no angle")
        for qubit, angle in self.local_phases:
            _check_angle(angle, self.id)

    @property
    def is_two_qubit(self) -> bool:
        return self.kind in TWO_QUBIT_KINDS

    @property
    def in_place(self) -> bool:
        """Single-qubit gates execute on their patch and never enter routing."""
        return self.kind not in TWO_QUBIT_KINDS

    def other(self, qubit: int) -> int:
        """Return the endpoint of a two-qubit gate that is not ``qubit``."""
        first, second = self.qubits
        if qubit == first:
            return second
        if qubit == second:
            return first
        raise ValueError(f"Qubit {qubit} is not an operand of gate {self.id}")


def _check_angle(angle: float, gate_id: int) -> None:
    if not math.isfinite(angle) or not (-TWO_PI < angle <= TWO_PI):
        raise ValueError(f"Gate {gate_id} angle {angle!r} outside (-2pi, 2pi]")


def gates_commute(first: Gate, second: Gate) -> bool:
    """
    Syntactic commutation rule used to build commuting layers.

    Disjoint supports commute, and so do gates that are both diagonal in
    the computational basis. The oracle module checks the rule on small
    instances.
    """
    if not set(first.qubits) & set(second.qubits):
        return True
    return first.kind in DIAGONAL_KINDS and second.kind in DIAGONAL_KINDS


@dataclass(frozen=True)
class LogicalCircuit:
    """Ordered gate list over ``num_qubits`` logical qubits plus commuting layers."""

    num_qubits: int
    gates: Tuple[Gate, ...]
    commuting_layers: Tuple[FrozenSet[int], ...]
    name: str = ""
    _index: Dict[int, int] = field(init=False, repr=False, compare=False)
    _layer_of: Dict[int, int] = field(init=False, repr=False, compare=False)

    def __post_init__(self) -> None:
        object.__setattr__(self, "gates", tuple(self.gates))
        object.__setattr__(self, "commuting_layers", tuple(frozenset(layer) for layer in self.commuting_layers))
        if self.num_qubits < 0:
            raise ValueError("num_qubits must be nonnegative")

        index: Dict[int, int] = {}
        for position, gate in enumerate(self.gates):
            if gate.id in index:
                raise ValueError(f"Duplicate gate id {gate.id}")
            if any(q >= self.num_qubits for q in gate.qubits):
                raise ValueError(f"Gate {gate.id} references a qubit >= {self.num_qubits}")
            index[gate.id] = position

        layer_of: Dict[int, int] = {}
        for number, layer in enumerate(self.commuting_layers):
            for gate_id in layer:
                if gate_id not in index:
                    raise ValueError(f"Commuting layer {number} names unknown gate {gate_id}")
                if gate_id in layer_of:
                    raise ValueError(f"Gate {gate_id} appears in two commuting layers")
                layer_of[gate_id] = number
        missing = set(index) - set(layer_of)
        if missing:
            raise ValueError(f"Gates {sorted(missing)} belong to no commuting layer")
        layers_in_order = [layer_of[gate.id] for gate in self.gates]
        if layers_in_order != sorted(layers_in_order):
            raise ValueError("Commuting layers must follow program order")

        object.__setattr__(self, "_index", index)
        object.__setattr__(self, "_layer_of", layer_of)

    @classmethod
    def from_gates(cls, num_qubits: int, gates: Iterable[Gate], name: str = "") -> "LogicalCircuit":
        """Build a circuit, grouping consecutive mutually commuting gates into layers."""
        gates = list(gates)
        layers: List[List[Gate]] = []
        for gate in gates:
            if layers and all(gates_commute(gate, other) for other in layers[-1]):
                layers[-1].append(gate)
            else:
                layers.append([gate])
        return cls(num_qubits, tuple(gates), tuple(frozenset(g.id for g in layer) for layer in layers), name)

    def gate(self, gate_id: int) -> Gate:
        return self.gates[self._index[gate_id]]

    def position(self, gate_id: int) -> int:
        """Program-order index of a gate."""
        return self._index[gate_id]

    def layer_of(self, gate_id: int) -> int:
        return self._layer_of[gate_id]

    def layer_gates(self, number: int) -> List[Gate]:
        """Gates of one commuting layer in program order."""
        return sorted((self.gate(g) for g in self.commuting_layers[number]), key=lambda g: self._index[g.id])

    def cphase_gates(self) -> List[Gate]:
        return [g for g in self.gates if g.kind == GateKind.CPHASE]

    def predecessors(self) -> Dict[int, Tuple[int, ...]]:
        """
        Immediate dependencies of every gate.

        A gate depends on the gates of the most recent earlier commuting
        layer that touch any of its qubits. Gates inside one layer never
        depend on each other.
        """
        last_layer_gates: Dict[int, List[int]] = {}
        preds: Dict[int, Tuple[int, ...]] = {}
        for number in range(len(self.commuting_layers)):
            layer = self.layer_gates(number)
            for gate in layer:
                found = {p for q in gate.qubits for p in last_layer_gates.get(q, ())}
                preds[gate.id] = tuple(sorted(found, key=self.position))
            touched: Dict[int, List[int]] = {}
            for gate in layer:
                for q in gate.qubits:
                    touched.setdefault(q, []).append(gate.id)
            last_layer_gates.update(touched)
        return preds

    def dependency_graph(self) -> nx.DiGraph:
        """Gate dependency DAG (edges point from predecessor to successor)."""
        graph = nx.DiGraph()
        graph.add_nodes_from(g.id for g in self.gates)
        for gate_id, preds in self.predecessors().items():
            graph.add_edges_from((p, gate_id) for p in preds)
        return graph


def decompose_cphase(gate: Gate, control: Optional[int] = None, id_base: int = 0) -> List[Gate]:
    """
    Decompose a C-Phase into CNOT, Rz, CNOT.

    The target rotation is ``-theta/2``; the companion ``+theta/2``
    rotations on control and target ride on the first CNOT as in-place
    phases so the product equals the C-Phase up to global phase.

    Args:
        gate: CPHASE gate
        control: Which operand acts as control (default: first qubit)
        id_base: Id of the first emitted gate

    Returns:
        ``[CNOT(c, t), RZ(t, -theta/2), CNOT(c, t)]`` with ``origin`` set
    """
    if gate.kind != GateKind.CPHASE:
        raise ValueError(f"decompose_cphase expects a CPHASE gate, got {gate.kind.value}")
    control = gate.qubits[0] if control is None else control
    target = gate.other(control)
    half = gate.angle / 2  # type: ignore[operator]
    return [
        Gate(id_base, GateKind.CNOT, (control, target), origin=gate.id,
             local_phases=((control, half), (target, half))),
        Gate(id_base + 1, GateKind.RZ, (target,), angle=-half, origin=gate.id),
        Gate(id_base + 2, GateKind.CNOT, (control, target), origin=gate.id),
    ]


def decompose_circuit(circuit: LogicalCircuit) -> LogicalCircuit:
    """Replace every C-Phase by its three-gate decomposition."""
    gates: List[Gate] = []
    for gate in circuit.gates:
        if gate.kind == GateKind.CPHASE:
            gates.extend(decompose_cphase(gate, id_base=len(gates)))
        else:
            gates.append(Gate(len(gates), gate.kind, gate.qubits, gate.angle, gate.origin, gate.local_phases))
    return LogicalCircuit.from_gates(circuit.num_qubits, gates, circuit.name)


class SplitMix64:
    """
    SplitMix64 generator.

    Used for QAOA edge sampling so instance sets are reproducible from the
    seed and this documented algorithm alone.
    """

    MASK = (1 << 64) - 1

    def __init__(self, seed: int):
        self.state = seed & self.MASK

    def next_u64(self) -> int:
        self.state = (self.state + 0x9E3779B97F4A7C15) & self.MASK
        z = self.state
        z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & self.MASK
        z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & self.MASK
        return z ^ (z >> 31)

    def random(self) -> float:
        """Uniform float in [0, 1) from the top 53 bits."""
        return (self.next_u64() >> 11) * (1.0 / (1 << 53))


def sample_edges(n: int, edge_prob: float, seed: int) -> List[Tuple[int, int]]:
    """Erdos-Renyi G(n, p): one draw per ordered pair ``i < j``."""
    rng = SplitMix64(seed)
    edges = []
    for i in range(n):
        for j in range(i + 1, n):
            if rng.random() < edge_prob:
                edges.append((i, j))
    return edges


def gen_qaoa(
    n: int,
    edge_prob: float = 0.5,
    seed: int = 0,
    gamma: float = DEFAULT_GAMMA,
    beta: float = DEFAULT_BETA,
) -> LogicalCircuit:
    """
    Depth-1 QAOA on a seeded Erdos-Renyi graph.

    The cost layer holds one CPHASE(2*gamma) per edge, all in a single
    commuting layer. The mixer follows as in-place H, RZ(2*beta), H on
    every qubit.

    Example:
        ```python
        circuit = gen_qaoa(20, 0.5, seed=7)
        ```
    """
    if n < 2:
        raise ValueError("QAOA needs at least 2 qubits")
    if not 0.0 <= edge_prob <= 1.0:
        raise ValueError("edge_prob must lie in [0, 1]")

    gates: List[Gate] = []
    for i, j in sample_edges(n, edge_prob, seed):
        gates.append(Gate(len(gates), GateKind.CPHASE, (i, j), angle=2 * gamma))
    for kind in (GateKind.H, GateKind.RZ, GateKind.H):
        for q in range(n):
            angle = 2 * beta if kind == GateKind.RZ else None
            gates.append(Gate(len(gates), kind, (q,), angle=angle))
    return LogicalCircuit.from_gates(n, gates, name=f"qaoa-n{n}-p{edge_prob}-s{seed}")


def gen_qft(n: int) -> LogicalCircuit:
    """
    Textbook QFT without the final swaps.

    For each qubit ``i``: one H, then CPHASE(pi / 2**(j-i)) between every
    later qubit ``j`` and ``i``. Each such chain shares qubit ``i`` and forms
    one commuting layer.
    """
    if n < 1:
        raise ValueError("QFT needs at least 1 qubit")
    gates: List[Gate] = []
    for i in range(n):
        gates.append(Gate(len(gates), GateKind.H, (i,)))
        for j in range(i + 1, n):
            gates.append(Gate(len(gates), GateKind.CPHASE, (j, i), angle=math.pi / 2 ** (j - i)))
    return LogicalCircuit.from_gates(n, gates, name=f"qft-n{n}")


_ANGLE_RE = re.compile(r"^(?P<sign>-)?(?P<coef>\d+(\.\d*)?)?\*?pi(/(?P<den>\d+(\.\d*)?))?$")


def parse_angle(text: str) -> float:
    """Parse a float or a ``[-][k*]pi[/d]`` expression."""
    text = text.strip().lower()
    match = _ANGLE_RE.match(text)
    if match:
        value = math.pi * float(match.group("coef") or 1) / float(match.group("den") or 1)
        return -value if match.group("sign") else value
    return float(text)


def parse_circuit(text: str, name: str = "") -> LogicalCircuit:
    """
    Parse the line-oriented circuit format.

    ``qubits N`` header, then one gate per line: ``CP c t theta``,
    ``CNOT c t``, ``H q``, ``S q``, ``T q`` or ``RZ q theta``. Blank lines
    and ``#`` comments are ignored.
    """
    num_qubits: Optional[int] = None
    gates: List[Gate] = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        parts = line.split()
        head = parts[0].upper()
        try:
            if head == "QUBITS":
                num_qubits = int(parts[1])
                continue
            if num_qubits is None:
                raise ValueError("missing 'qubits N' header")
            kind = GateKind(head)
            arity = 2 if kind in TWO_QUBIT_KINDS else 1
            qubits = tuple(int(p) for p in parts[1:1 + arity])
            angle = parse_angle(parts[1 + arity]) if kind in ANGLE_KINDS else None
            expected = 1 + arity + (1 if kind in ANGLE_KINDS else 0)
            if len(parts) != expected or kind == GateKind.MEASURE:
                raise ValueError(f"malformed {head} line")
            gates.append(Gate(len(gates), kind, qubits, angle=angle))
        except (ValueError, IndexError) as e:
            raise ValueError(f"line {lineno}: {e}") from e
    if num_qubits is None:
        raise ValueError("missing 'qubits N' header")
    return LogicalCircuit.from_gates(num_qubits, gates, name=name)


def load_circuit(path: Union[str, Path]) -> LogicalCircuit:
    """Read a circuit file."""
    path = Path(path)
    return parse_circuit(path.read_text(encoding="utf-8"), name=path.stem)


def dump_circuit(circuit: LogicalCircuit) -> str:
    """Serialize to the circuit file format (angles as exact float reprs)."""
    lines = [f"qubits {circuit.num_qubits}"]
    for gate in circuit.gates:
        operands: Sequence[str] = [str(q) for q in gate.qubits]
        if gate.angle is not None:
            operands = [*operands, repr(gate.angle)]
        lines.append(" ".join([gate.kind.value, *operands]))
    return "\n".join(lines) + "\n"

"""
Tests for the circuit model, generators and file codec.
"""

import math

import pytest

from latticesched.core.circuit import (
    Gate,
    GateKind,
    LogicalCircuit,
    SplitMix64,
    decompose_circuit,
    decompose_cphase,
    dump_circuit,
    gates_commute,
    gen_qaoa,
    gen_qft,
    load_circuit,
    parse_angle,
    parse_circuit,
    sample_edges,
)


class TestGate:
    """Tests for Gate validation."""

    def test_cphase(self):
        """Test a well-formed C-Phase."""
        gate = Gate(0, GateKind.CPHASE, (0, 1), angle=0.5)
        assert gate.is_two_qubit
        assert not gate.in_place
        assert gate.other(0) == 1
        assert gate.other(1) == 0

    def test_kind_from_string(self):
        """Test the kind is coerced from its value."""
        assert Gate(0, "H", (2,)).kind == GateKind.H

    @pytest.mark.parametrize("kwargs", [
        {"kind": GateKind.CPHASE, "qubits": (0,), "angle": 0.1},
        {"kind": GateKind.CPHASE, "qubits": (1, 1), "angle": 0.1},
        {"kind": GateKind.CPHASE, "qubits": (0, 1)},
        {"kind": GateKind.H, "qubits": (0,), "angle": 0.1},
        {"kind": GateKind.RZ, "qubits": (-1,), "angle": 0.1},
        {"kind": GateKind.RZ, "qubits": (0,), "angle": 7.0},
        {"kind": GateKind.RZ, "qubits": (0,), "angle": float("nan")},
    ])
    def test_invalid(self, kwargs):
        """Test malformed gates are rejected."""
        with pytest.raises(ValueError):
            Gate(0, **kwargs)

    def test_angle_range_boundaries(self):
        """Test 2pi is allowed and -2pi is not."""
        Gate(0, GateKind.RZ, (0,), angle=2 * math.pi)
        with pytest.raises(ValueError):
            Gate(0, GateKind.RZ, (0,), angle=-2 * math.pi)

    def test_other_rejects_foreign_qubit(self):
        """Test other() with a non-operand."""
        with pytest.raises(ValueError):
            Gate(0, GateKind.CPHASE, (0, 1), angle=0.1).other(2)


class TestCommutation:
    """Tests for the syntactic commutation rule."""

    def test_disjoint(self):
        """Test disjoint gates commute."""
        assert gates_commute(Gate(0, GateKind.H, (0,)), Gate(1, GateKind.H, (1,)))

    def test_diagonal(self):
        """Test diagonal gates sharing a qubit commute."""
        assert gates_commute(Gate(0, GateKind.CPHASE, (0, 1), angle=0.3), Gate(1, GateKind.T, (0,)))

    def test_non_diagonal_overlap(self):
        """Test H does not commute with a C-Phase on its qubit."""
        assert not gates_commute(Gate(0, GateKind.CPHASE, (0, 1), angle=0.3), Gate(1, GateKind.H, (1,)))


class TestLogicalCircuit:
    """Tests for LogicalCircuit."""

    def test_from_gates_layers(self):
        """Test consecutive commuting gates share a layer."""
        circuit = LogicalCircuit.from_gates(3, [
            Gate(0, GateKind.CPHASE, (0, 1), angle=0.3),
            Gate(1, GateKind.CPHASE, (1, 2), angle=0.3),
            Gate(2, GateKind.H, (1,)),
            Gate(3, GateKind.T, (0,)),
        ])
        assert circuit.commuting_layers == (frozenset({0, 1}), frozenset({2, 3}))
        assert circuit.layer_of(3) == 1

    def test_predecessors(self):
        """Test dependencies follow the latest earlier layer on each qubit."""
        circuit = LogicalCircuit.from_gates(3, [
            Gate(0, GateKind.CPHASE, (0, 1), angle=0.3),
            Gate(1, GateKind.H, (1,)),
            Gate(2, GateKind.H, (2,)),
            Gate(3, GateKind.CPHASE, (1, 2), angle=0.3),
        ])
        preds = circuit.predecessors()
        assert preds[0] == ()
        assert preds[1] == (0,)
        assert preds[2] == ()
        assert preds[3] == (1, 2)
        graph = circuit.dependency_graph()
        assert set(graph.edges) == {(0, 1), (1, 3), (2, 3)}

    def test_duplicate_ids(self):
        """Test duplicate gate ids are rejected."""
        with pytest.raises(ValueError, match="Duplicate"):
            LogicalCircuit.from_gates(2, [Gate(0, GateKind.H, (0,)), Gate(0, GateKind.H, (1,))])

    def test_qubit_out_of_range(self):
        """Test gates must stay within num_qubits."""
        with pytest.raises(ValueError):
            LogicalCircuit.from_gates(1, [Gate(0, GateKind.H, (1,))])

    def test_layers_must_cover_gates(self):
        """Test every gate belongs to a layer."""
        with pytest.raises(ValueError, match="no commuting layer"):
            LogicalCircuit(1, (Gate(0, GateKind.H, (0,)),), ())

    def test_layers_follow_program_order(self):
        """Test layers cannot reorder gates."""
        gates = (Gate(0, GateKind.H, (0,)), Gate(1, GateKind.H, (0,)))
        with pytest.raises(ValueError, match="program order"):
            LogicalCircuit(1, gates, (frozenset({1}), frozenset({0})))


class TestDecomposition:
    """Tests for the C-Phase decomposition."""

    def test_decompose_cphase(self):
        """Test the CNOT, Rz, CNOT shape and the companion phases."""
        gate = Gate(7, GateKind.CPHASE, (2, 5), angle=0.8)
        first, rz, second = decompose_cphase(gate, id_base=10)
        assert (first.kind, first.qubits) == (GateKind.CNOT, (2, 5))
        assert first.local_phases == ((2, 0.4), (5, 0.4))
        assert (rz.kind, rz.qubits, rz.angle) == (GateKind.RZ, (5,), -0.4)
        assert (second.kind, second.qubits) == (GateKind.CNOT, (2, 5))
        assert [g.id for g in (first, rz, second)] == [10, 11, 12]
        assert all(g.origin == 7 for g in (first, rz, second))

    def test_decompose_with_swapped_control(self):
        """Test choosing the second operand as control."""
        first, rz, _ = decompose_cphase(Gate(0, GateKind.CPHASE, (2, 5), angle=0.8), control=5)
        assert first.qubits == (5, 2)
        assert rz.qubits == (2,)

    def test_decompose_rejects_other_kinds(self):
        """Test only C-Phase gates decompose."""
        with pytest.raises(ValueError):
            decompose_cphase(Gate(0, GateKind.H, (0,)))

    def test_decompose_circuit(self):
        """Test every C-Phase expands into three gates."""
        circuit = decompose_circuit(gen_qft(3))
        assert len(circuit.gates) == 3 + 3 * 3
        assert not circuit.cphase_gates()


class TestGenerators:
    """Tests for the benchmark generators."""

    def test_splitmix_reference_values(self):
        """Test SplitMix64 against its published seed-0 outputs."""
        rng = SplitMix64(0)
        assert rng.next_u64() == 0xE220A8397B1DCDAF
        assert rng.next_u64() == 0x6E789E6AA1B965F4

    def test_sample_edges_deterministic(self):
        """Test edge sampling depends only on the seed."""
        assert sample_edges(8, 0.5, 3) == sample_edges(8, 0.5, 3)
        assert sample_edges(8, 1.0, 3) == [(i, j) for i in range(8) for j in range(i + 1, 8)]
        assert sample_edges(8, 0.0, 3) == []

    def test_qaoa_structure(self):
        """Test the QAOA cost layer and mixer."""
        circuit = gen_qaoa(5, 1.0, seed=0)
        cphases = circuit.cphase_gates()
        assert len(cphases) == 10
        assert all(g.angle == pytest.approx(0.7) for g in cphases)
        assert circuit.commuting_layers[0] == frozenset(g.id for g in cphases)
        assert len(circuit.gates) == 10 + 3 * 5

    def test_qaoa_rejects_bad_arguments(self):
        """Test QAOA argument checks."""
        with pytest.raises(ValueError):
            gen_qaoa(1)
        with pytest.raises(ValueError):
            gen_qaoa(4, edge_prob=1.5)

    def test_qft_structure(self):
        """Test QFT gate count, angles and layers."""
        circuit = gen_qft(4)
        assert len(circuit.gates) == 4 + 6
        cp = [g for g in circuit.gates if g.kind == GateKind.CPHASE]
        assert cp[0].qubits == (1, 0)
        assert cp[0].angle == pytest.approx(math.pi / 2)
        assert cp[2].qubits == (3, 0)
        assert cp[2].angle == pytest.approx(math.pi / 8)
        assert circuit.commuting_layers[1] == frozenset({1, 2, 3})


class TestCircuitFile:
    """Tests for the line-oriented circuit format."""

    def test_parse_angle(self):
        """Test float and pi expressions."""
        assert parse_angle("0.25") == 0.25
        assert parse_angle("pi/4") == pytest.approx(math.pi / 4)
        assert parse_angle("-pi/2") == pytest.approx(-math.pi / 2)
        assert parse_angle("3*pi/8") == pytest.approx(3 * math.pi / 8)

    def test_parse(self):
        """Test parsing a small circuit with comments."""
        circuit = parse_circuit("""
            # sample
            qubits 3
            H 0
            CP 0 1 pi/4   # trailing comment
            RZ 2 0.5
        """)
        assert circuit.num_qubits == 3
        assert [g.kind for g in circuit.gates] == [GateKind.H, GateKind.CPHASE, GateKind.RZ]
        assert circuit.gates[1].angle == pytest.approx(math.pi / 4)

    @pytest.mark.parametrize("text", [
        "H 0",
        "qubits 2\nCP 0 1",
        "qubits 2\nH 0 1",
        "qubits 2\nFOO 0",
        "qubits 2\nMEASURE 0",
    ])
    def test_parse_errors(self, text):
        """Test malformed files are rejected."""
        with pytest.raises(ValueError):
            parse_circuit(text)

    def test_parse_error_names_line(self):
        """Test errors report the offending line."""
        with pytest.raises(ValueError, match="line 3"):
            parse_circuit("qubits 2\nH 0\nCP 0 1\n")

    def test_dump_and_load(self, tmp_path):
        """Test a dumped circuit loads back with identical gates."""
        circuit = gen_qaoa(4, 0.5, seed=2)
        path = tmp_path / "qaoa.circ"
        path.write_text(dump_circuit(circuit), encoding="utf-8")
        loaded = load_circuit(path)
        assert loaded.name == "qaoa"
        assert loaded.gates == circuit.gates
        assert loaded.commuting_layers == circuit.commuting_layers

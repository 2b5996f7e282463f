"""
Tests for the dense-matrix oracle and schedule replay.
"""

import math

import numpy as np
import pytest

from latticesched.core.circuit import Gate, GateKind, LogicalCircuit, gates_commute, gen_qaoa, gen_qft
from latticesched.core.exceptions import OracleError
from latticesched.core.greedy import greedy_compile
from latticesched.core.grouping import pack_groups, plan_circuit
from latticesched.core.layout import LayoutKind, MsDensity, build_layout
from latticesched.core.oracle import (
    check_commute,
    circuit_unitary,
    equal_up_to_global_phase,
    gate_matrix,
    replay_schedule,
    verify_schedule,
)
from latticesched.core.rotation import Regime, RotationSettings
from latticesched.core.scheduler import execute_pipeline
from latticesched.core.slices import execute_slices


def _schedule(mode, circuit, grid, config, settings):
    if mode == "greedy":
        return greedy_compile(circuit, grid, config, settings).schedule
    if mode == "slice":
        plan = pack_groups(plan_circuit(circuit, grid, config), grid, config)
        return execute_slices(circuit, plan, grid, config, settings).to_event_schedule()
    return execute_pipeline(circuit, grid, config, settings)


class TestUnitaries:
    """Tests for matrix construction."""

    def test_cphase_matrix(self):
        """Test the C-Phase phase sits on |11>."""
        matrix = gate_matrix(Gate(0, GateKind.CPHASE, (0, 1), angle=math.pi))
        assert np.allclose(matrix, np.diag([1, 1, 1, -1]))

    def test_big_endian(self):
        """Test qubit 0 is the most significant bit."""
        circuit = LogicalCircuit.from_gates(2, [Gate(0, GateKind.CNOT, (0, 1))])
        matrix = circuit_unitary(circuit).matrix
        assert matrix[3, 2] == 1
        assert matrix[1, 1] == 1

    @pytest.mark.parametrize("n", [2, 3, 4])
    def test_qft_is_unitary(self, n):
        """Test generated circuits give unitary matrices."""
        assert circuit_unitary(gen_qft(n)).is_unitary()

    def test_cphase_decomposition(self):
        """Test CNOT with companion phases, Rz and CNOT equals C-Phase up to phase."""
        theta = 0.83
        direct = LogicalCircuit.from_gates(2, [Gate(0, GateKind.CPHASE, (0, 1), angle=theta)])
        lowered = LogicalCircuit.from_gates(2, [
            Gate(0, GateKind.CNOT, (0, 1), local_phases=((0, theta / 2), (1, theta / 2))),
            Gate(1, GateKind.RZ, (1,), angle=-theta / 2),
            Gate(2, GateKind.CNOT, (0, 1)),
        ])
        equal, _ = circuit_unitary(direct).equivalent(circuit_unitary(lowered))
        assert equal

    def test_too_many_qubits(self):
        """Test the oracle refuses large circuits."""
        with pytest.raises(OracleError):
            circuit_unitary(LogicalCircuit.from_gates(9, []))

    def test_measure_has_no_unitary(self):
        """Test measurements are not unitary."""
        with pytest.raises(OracleError):
            gate_matrix(Gate(0, GateKind.MEASURE, (0,)))


class TestGlobalPhase:
    """Tests for equal_up_to_global_phase."""

    def test_phase_is_ignored(self):
        """Test a global phase does not matter."""
        matrix = gate_matrix(Gate(0, GateKind.H, (0,)))
        assert equal_up_to_global_phase(matrix, np.exp(0.4j) * matrix)[0]

    def test_difference_is_reported(self):
        """Test a real difference fails with its deviation."""
        equal, deviation = equal_up_to_global_phase(np.eye(2), np.diag([1, -1]))
        assert not equal
        assert deviation == pytest.approx(2.0)

    def test_shape_mismatch(self):
        """Test shapes must match."""
        assert equal_up_to_global_phase(np.eye(2), np.eye(4)) == (False, math.inf)


class TestCommutation:
    """Tests for the syntactic commutation rule against the oracle."""

    @pytest.mark.parametrize("first, second", [
        (Gate(0, GateKind.CPHASE, (0, 1), angle=0.3), Gate(1, GateKind.CPHASE, (1, 2), angle=1.1)),
        (Gate(0, GateKind.CPHASE, (0, 1), angle=0.3), Gate(1, GateKind.RZ, (1,), angle=0.5)),
        (Gate(0, GateKind.S, (0,)), Gate(1, GateKind.T, (0,))),
        (Gate(0, GateKind.H, (0,)), Gate(1, GateKind.H, (1,))),
        (Gate(0, GateKind.H, (0,)), Gate(1, GateKind.CPHASE, (0, 1), angle=0.3)),
        (Gate(0, GateKind.CNOT, (0, 1)), Gate(1, GateKind.RZ, (1,), angle=0.5)),
    ])
    def test_rule_is_sound(self, first, second):
        """Test every pair the rule calls commuting does commute."""
        if gates_commute(first, second):
            assert check_commute(first, second)
        else:
            assert not check_commute(first, second)


class TestReplay:
    """Tests for replay_schedule and verify_schedule."""

    def test_replay_structure(self, single_cp, sparse4, config, settings):
        """Test a C-Phase replays as CNOT, Rz, CNOT."""
        schedule = execute_pipeline(single_cp, sparse4, config, settings)
        replayed = replay_schedule(schedule, single_cp)
        assert [g.kind for g in replayed.gates] == [GateKind.CNOT, GateKind.RZ, GateKind.CNOT]
        assert replayed.gates[1].angle == pytest.approx(-math.pi / 6)
        assert all(g.origin == 0 for g in replayed.gates)

    @pytest.mark.parametrize("mode", ["greedy", "slice", "pipelined"])
    @pytest.mark.parametrize("n", [3, 4, 5, 6])
    def test_qaoa_preserved(self, mode, n, config, settings):
        """Test QAOA schedules reproduce the circuit unitary."""
        circuit = gen_qaoa(n, 0.6, seed=n)
        grid = build_layout(LayoutKind.SQUARE_SPARSE, n, MsDensity.ABUNDANT)
        equal, deviation = verify_schedule(_schedule(mode, circuit, grid, config, settings), circuit)
        assert equal, deviation

    @pytest.mark.parametrize("mode", ["greedy", "slice", "pipelined"])
    @pytest.mark.parametrize("n", [2, 3, 4, 5, 6])
    def test_qft_preserved(self, mode, n, config, settings):
        """Test QFT schedules reproduce the circuit unitary."""
        circuit = gen_qft(n)
        grid = build_layout(LayoutKind.COMPACT, n, MsDensity.ABUNDANT)
        equal, deviation = verify_schedule(_schedule(mode, circuit, grid, config, settings), circuit)
        assert equal, deviation

    @pytest.mark.parametrize("mode", ["greedy", "slice", "pipelined"])
    @pytest.mark.parametrize("regime", [Regime.FFT_MSD, Regime.FFT_MSC])
    def test_fault_tolerant_regimes_preserved(self, mode, regime, config):
        """Test synthesized regimes replay to the same unitary."""
        circuit = gen_qft(4)
        grid = build_layout(LayoutKind.SQUARE_SPARSE, 4, MsDensity.STARVED)
        settings = RotationSettings(regime, epsilon=1)
        assert verify_schedule(_schedule(mode, circuit, grid, config, settings), circuit)[0]

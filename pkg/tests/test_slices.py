"""
Tests for the slice-based executor.
"""

from fractions import Fraction

import pytest

from latticesched.core.circuit import Gate, GateKind, LogicalCircuit, gen_qaoa, gen_qft
from latticesched.core.exceptions import ConfigError
from latticesched.core.grouping import GroupPlan, pack_groups, plan_circuit
from latticesched.core.layout import LayoutKind, MsDensity, build_layout
from latticesched.core.rotation import Regime, RotationSettings
from latticesched.core.schedule import Stage, check_schedule
from latticesched.core.slices import SliceExecutor, execute_slices


def _run(circuit, grid, config, settings="eft"):
    plan = pack_groups(plan_circuit(circuit, grid, config), grid, config)
    return execute_slices(circuit, plan, grid, config, settings)


class TestSliceExecutor:
    """Tests for execute_slices."""

    def test_single_cphase(self, single_cp, sparse4, config):
        """Test one slice: horizontal sweep, injection, aligned sweep."""
        result = _run(single_cp, sparse4, config)
        assert len(result.slices) == 1
        assert result.slices[0].spans == (Fraction(4), Fraction(42, 5), Fraction(3))
        assert result.total_cycles == Fraction(77, 5)
        b = [i for i in result.intervals if i.stage == Stage.B]
        assert [i.cells for i in b] == [((1, 4),)]

    def test_packed_gate_shares_slice(self, disjoint_cps, sparse4, config):
        """Test a packed gate runs inside the same slice."""
        result = _run(disjoint_cps, sparse4, config)
        assert len(result.slices) == 1
        assert result.total_cycles == Fraction(72, 5)
        assert result.counts["packed"] == 1
        b_cells = sorted(i.cells for i in result.intervals if i.stage == Stage.B)
        assert b_cells == [((3, 2),), ((3, 4),)]

    def test_star_sweep(self, star_cps, sparse5, config):
        """Test the four-target sweep costs the slowest path."""
        result = _run(star_cps, sparse5, config)
        assert result.slices[0].spans[0] == 4
        assert result.slices[0].group_index == 0

    def test_inplace_slices(self, sparse3, config):
        """Test in-place gates get their own slices between groups."""
        circuit = gen_qft(3)
        result = _run(circuit, sparse3, config)
        assert [r.kind for r in result.slices] == ["inplace", "group", "inplace", "group", "inplace"]
        assert result.slices[0].total == 1
        assert result.recomputed_total() == result.total_cycles

    def test_resets_between_slices(self, sparse4, config):
        """Test the total counts one reset between consecutive slices."""
        circuit = gen_qft(4)
        result = _run(circuit, sparse4, config.replace(c_reset=3))
        assert result.recomputed_total() == result.total_cycles
        starts = [r.start for r in result.slices]
        for before, after in zip(result.slices, result.slices[1:]):
            assert after.start == before.start + before.total + 3
        assert starts[0] == 0

    @pytest.mark.parametrize("regime", list(Regime))
    def test_valid_for_every_regime(self, regime, sparse4, config):
        """Test the lowered schedule passes validation in every regime."""
        circuit = gen_qaoa(4, 0.8, seed=2)
        result = _run(circuit, sparse4, config, RotationSettings(regime, epsilon=1))
        schedule = result.to_event_schedule()
        assert check_schedule(schedule, sparse4, circuit) == []
        assert result.recomputed_total() == result.total_cycles

    def test_grid_untouched(self, single_cp, sparse4, config):
        """Test the caller's grid keeps its state."""
        _run(single_cp, sparse4, config)
        assert sparse4.occupied() == set()
        assert sparse4.orientation((2, 3)).value == "x"

    def test_rejects_cnot(self, sparse4, config):
        """Test explicit CNOT gates are not executable here."""
        circuit = LogicalCircuit.from_gates(2, [Gate(0, GateKind.CNOT, (0, 1))])
        with pytest.raises(ConfigError):
            SliceExecutor(circuit, GroupPlan([]), sparse4, config, RotationSettings())

    def test_deterministic(self, config):
        """Test repeated runs give identical traces."""
        circuit = gen_qaoa(6, 0.6, seed=9)
        grid = build_layout(LayoutKind.COMPACT, 6, MsDensity.ABUNDANT)
        first = _run(circuit, grid, config).to_event_schedule().trace_rows()
        assert _run(circuit, grid, config).to_event_schedule().trace_rows() == first

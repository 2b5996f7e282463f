"""
Tests for Rz synthesis.
"""

import math

import pytest

from latticesched.core.exceptions import ConfigError, SynthesisLookupError
from latticesched.core.synthesis import (
    RzDecomposition,
    SynthesisProvider,
    SynthesisTable,
    model_sequence,
    model_t_count,
    synthesize_rz,
)


class TestRzDecomposition:
    """Tests for RzDecomposition."""

    def test_from_sequence_counts(self):
        """Test counts are derived from the sequence."""
        dec = RzDecomposition.from_sequence("HSTTH", 3)
        assert (dec.n_t, dec.n_s, dec.n_h) == (2, 1, 2)
        assert dec.sequence == ("H", "S", "T", "T", "H")

    def test_inconsistent_counts(self):
        """Test mismatched counts are rejected."""
        with pytest.raises(ValueError):
            RzDecomposition(("T",), 2, 0, 0, 3)

    def test_bad_alphabet(self):
        """Test gates outside H/S/T are rejected."""
        with pytest.raises(ValueError):
            RzDecomposition.from_sequence("HXT", 3)

    def test_identity(self):
        """Test the empty sequence is the identity."""
        assert RzDecomposition((), 0, 0, 0, 3).is_identity


class TestModelProvider:
    """Tests for the analytic model."""

    @pytest.mark.parametrize("epsilon, expected", [(1, 14), (3, 34), (6, 64), (10, 104)])
    def test_t_count(self, epsilon, expected):
        """Test the T-count formula."""
        assert model_t_count(epsilon) == expected

    def test_t_count_monotone(self):
        """Test higher precision never costs fewer T gates."""
        counts = [model_t_count(e) for e in range(1, 16)]
        assert counts == sorted(counts)

    def test_sequence_shape(self):
        """Test the model sequence matches its T-count."""
        dec = model_sequence(6)
        assert dec.n_t == 64
        assert dec.n_s == 65
        assert dec.n_h == 65
        assert dec.precision_exponent == 6


class TestSynthesizeRz:
    """Tests for synthesize_rz."""

    def test_zero_angle(self):
        """Test a zero rotation needs no gates."""
        assert synthesize_rz(0.0, 6).is_identity
        assert synthesize_rz(2 * math.pi, 6).is_identity

    def test_exact_t(self):
        """Test pi/4 is exactly one T for every provider."""
        assert synthesize_rz(math.pi / 4, 6).sequence == ("T",)
        assert synthesize_rz(math.pi / 4, 6, SynthesisProvider.FILE, SynthesisTable()).sequence == ("T",)

    def test_generic_angle(self):
        """Test a generic angle uses the model."""
        assert synthesize_rz(0.3, 4) == model_sequence(4)

    def test_invalid_epsilon(self):
        """Test epsilon must be positive."""
        with pytest.raises(ValueError):
            synthesize_rz(0.3, 0)

    def test_file_provider_needs_table(self):
        """Test the file provider without a table."""
        with pytest.raises(ConfigError):
            synthesize_rz(0.3, 4, SynthesisProvider.FILE)


class TestSynthesisTable:
    """Tests for SynthesisTable."""

    def test_lookup(self):
        """Test lookups match after angle normalization."""
        table = SynthesisTable({(0.3, 4): "HTSH"})
        assert table.lookup(0.3 + 2 * math.pi, 4).sequence == ("H", "T", "S", "H")
        assert len(table) == 1

    def test_missing_entry(self):
        """Test a missing entry raises SynthesisLookupError."""
        table = SynthesisTable({(0.3, 4): "HTSH"})
        with pytest.raises(SynthesisLookupError):
            table.lookup(0.3, 5)
        with pytest.raises(SynthesisLookupError):
            synthesize_rz(0.31, 4, SynthesisProvider.FILE, table)

    def test_load(self, tmp_path):
        """Test loading a table file with comments and an empty sequence."""
        path = tmp_path / "rz.txt"
        path.write_text("# angle eps seq\n0.3 4 HTSHT\n-0.35 4\n", encoding="utf-8")
        table = SynthesisTable.load(path)
        assert table.lookup(0.3, 4).n_t == 2
        assert table.lookup(-0.35, 4).is_identity

    def test_load_malformed(self, tmp_path):
        """Test malformed lines are configuration errors."""
        path = tmp_path / "rz.txt"
        path.write_text("0.3 4 HQT\n", encoding="utf-8")
        with pytest.raises(ConfigError):
            SynthesisTable.load(path)
        path.write_text("0.3\n", encoding="utf-8")
        with pytest.raises(ConfigError):
            SynthesisTable.load(path)

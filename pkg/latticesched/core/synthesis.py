"""
Rz synthesis into Clifford+T sequences.

Two providers are available: an analytic model of gridsynth-style output
lengths, and a file-backed table of pre-synthesized sequences.
"""

import math
from dataclasses import dataclass
from enum import Enum
from pathlib import Path
from typing import Dict, Optional, Sequence, Tuple, Union

from .exceptions import ConfigError, SynthesisLookupError

GATE_ALPHABET = frozenset("HST")
_ANGLE_DIGITS = 9


class SynthesisProvider(str, Enum):
    FILE = "file"
    MODEL = "model"


@dataclass(frozen=True)
class RzDecomposition:
    """Clifford+T sequence realizing one Rz to precision 10**-epsilon."""

    sequence: Tuple[str, ...]
    n_t: int
    n_s: int
    n_h: int
    precision_exponent: int

    def __post_init__(self) -> None:
        object.__setattr__(self, "sequence", tuple(self.sequence))
        if any(g not in GATE_ALPHABET for g in self.sequence):
            raise ValueError(f"Sequence contains gates outside H/S/T: {self.sequence}")
        counted = (self.sequence.count("T"), self.sequence.count("S"), self.sequence.count("H"))
        if counted != (self.n_t, self.n_s, self.n_h):
            raise ValueError(f"Gate counts {counted} disagree with ({self.n_t}, {self.n_s}, {self.n_h})")

    @classmethod
    def from_sequence(cls, sequence: Sequence[str], epsilon: int) -> "RzDecomposition":
        seq = tuple(sequence)
        return cls(seq, seq.count("T"), seq.count("S"), seq.count("H"), epsilon)

    @property
    def is_identity(self) -> bool:
        return not self.sequence


def model_t_count(epsilon: int) -> int:
    """T-count of a gridsynth-style sequence: ``round(3 * log2(10**epsilon)) + 4``."""
    return round(3 * epsilon * math.log2(10)) + 4


def model_sequence(epsilon: int) -> RzDecomposition:
    """Alternating ``(H S T)*`` sequence with T-count from :func:`model_t_count`."""
    n_t = model_t_count(epsilon)
    return RzDecomposition.from_sequence(("H", "S", "T") * n_t + ("H", "S"), epsilon)


def _normalize(angle: float) -> float:
    """Map an angle to (-pi, pi]."""
    wrapped = math.fmod(angle, 2 * math.pi)
    if wrapped <= -math.pi:
        wrapped += 2 * math.pi
    elif wrapped > math.pi:
        wrapped -= 2 * math.pi
    return wrapped


class SynthesisTable:
    """
    Pre-synthesized sequences keyed by (angle, epsilon).

    File format: one entry per line, ``angle epsilon SEQUENCE`` with the
    sequence written as a string over ``HST``. Angles are matched after
    rounding to nine decimals.
    """

    def __init__(self, entries: Optional[Dict[Tuple[float, int], Tuple[str, ...]]] = None):
        self._entries: Dict[Tuple[float, int], Tuple[str, ...]] = {}
        for (angle, epsilon), sequence in (entries or {}).items():
            self.add(angle, epsilon, sequence)

    @staticmethod
    def _key(angle: float, epsilon: int) -> Tuple[float, int]:
        return (round(_normalize(angle), _ANGLE_DIGITS), int(epsilon))

    def add(self, angle: float, epsilon: int, sequence: Sequence[str]) -> None:
        seq = tuple(sequence)
        if any(g not in GATE_ALPHABET for g in seq):
            raise ValueError(f"Invalid sequence for angle {angle!r}: {''.join(seq)}")
        self._entries[self._key(angle, epsilon)] = seq

    def lookup(self, angle: float, epsilon: int) -> RzDecomposition:
        try:
            sequence = self._entries[self._key(angle, epsilon)]
        except KeyError:
            raise SynthesisLookupError(angle, epsilon) from None
        return RzDecomposition.from_sequence(sequence, epsilon)

    def __len__(self) -> int:
        return len(self._entries)

    @classmethod
    def load(cls, path: Union[str, Path]) -> "SynthesisTable":
        table = cls()
        path = Path(path)
        for lineno, raw in enumerate(path.read_text(encoding="utf-8").splitlines(), start=1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            parts = line.split()
            if len(parts) not in (2, 3):
                raise ConfigError(f"{path}:{lineno}: expected 'angle epsilon SEQUENCE'")
            try:
                table.add(float(parts[0]), int(parts[1]), parts[2] if len(parts) == 3 else "")
            except ValueError as e:
                raise ConfigError(f"{path}:{lineno}: {e}") from e
        return table


def synthesize_rz(
    angle: float,
    epsilon: int,
    provider: SynthesisProvider = SynthesisProvider.MODEL,
    table: Optional[SynthesisTable] = None,
) -> RzDecomposition:
    """
    Return the Clifford+T sequence for ``Rz(angle)``.

    Zero angles yield the empty sequence and ``pi/4`` yields exactly one T
    regardless of provider.

    Args:
        angle: Rotation angle in radians
        epsilon: Precision exponent (>= 1)
        provider: MODEL (analytic) or FILE (table lookup)
        table: Required for the FILE provider

    Returns:
        RzDecomposition

    Raises:
        SynthesisLookupError: FILE provider has no entry for the angle
    """
    if epsilon < 1:
        raise ValueError(f"epsilon must be >= 1, got {epsilon}")
    reduced = _normalize(angle)
    if math.isclose(reduced, 0.0, abs_tol=1e-12):
        return RzDecomposition((), 0, 0, 0, epsilon)
    if math.isclose(reduced, math.pi / 4, abs_tol=1e-12):
        return RzDecomposition(("T",), 1, 0, 0, epsilon)

    provider = SynthesisProvider(provider)
    if provider == SynthesisProvider.FILE:
        if table is None:
            raise ConfigError("FILE synthesis provider requires a synthesis table")
        return table.lookup(angle, epsilon)
    return model_sequence(epsilon)

"""
Clock-cycle cost model.

Single source of truth for merge stages, patch rotation, path costs,
in-place Clifford costs, rotation-regime constants and the grid reset.
All quantities are exact ``Fraction`` cycles; reports round up only at
the very end.
"""

import json
import sys
from dataclasses import asdict, dataclass, fields
from enum import Enum
from fractions import Fraction
from pathlib import Path
from typing import Any, Dict, Iterable, Mapping, Optional, Sequence, Tuple, Union

from .circuit import GateKind
from .exceptions import ConfigError, RoutingError
from .layout import CellRole, Coord, LayoutGrid, Orientation
from .synthesis import RzDecomposition
from .validation import validate_model

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib

Cycles = Fraction


class RotationMode(str, Enum):
    """How misaligned ancilla cells on one path are charged."""

    SIMULTANEOUS = "simultaneous"
    PER_SEGMENT = "per_segment"


def to_cycles(value: Any) -> Fraction:
    """Convert ints, floats, decimal strings and fractions to exact cycles."""
    if isinstance(value, Fraction):
        return value
    if isinstance(value, bool):
        raise TypeError("cycle values cannot be booleans")
    if isinstance(value, float):
        return Fraction(repr(value))
    return Fraction(value)


_TIME_FIELDS = (
    "t_zz", "t_rot_patch", "t_xx", "t_h", "t_s", "t_rz_inject", "t_cult", "c_reset", "c_flow_per_turn",
)


@dataclass(frozen=True)
class CostConfig:
    """
    Latency constants, in clock cycles (one cycle is ``d`` syndrome rounds).

    Example:
        ```python
        config = CostConfig(c_flow_per_turn=1)
        config.t_rz_inject  # Fraction(42, 5)
        ```
    """

    t_zz: Fraction = Fraction(1)
    t_rot_patch: Fraction = Fraction(1)
    t_xx: Fraction = Fraction(1)
    t_h: Fraction = Fraction(1)
    t_s: Fraction = Fraction(3, 2)
    t_rz_inject: Fraction = Fraction(42, 5)
    t_cult: Fraction = Fraction(19, 10)
    c_reset: Fraction = Fraction(1)
    c_flow_per_turn: Fraction = Fraction(0)
    code_distance: int = 3
    rotation_mode: RotationMode = RotationMode.SIMULTANEOUS
    ms_candidates: int = 4

    def __post_init__(self) -> None:
        for name in _TIME_FIELDS:
            try:
                value = to_cycles(getattr(self, name))
            except (TypeError, ValueError) as e:
                raise ConfigError(f"{name}: {e}", {name: [str(e)]}) from e
            if value < 0:
                raise ConfigError(f"{name} must be nonnegative", {name: ["must be nonnegative"]})
            object.__setattr__(self, name, value)
        for name in ("t_zz", "t_xx"):
            if getattr(self, name) < 1:
                raise ConfigError(f"{name} must be >= 1", {name: ["must be >= 1"]})
        object.__setattr__(self, "rotation_mode", RotationMode(self.rotation_mode))
        if self.ms_candidates < 1:
            raise ConfigError("ms_candidates must be >= 1", {"ms_candidates": ["must be >= 1"]})
        if self.code_distance < 1:
            raise ConfigError("code_distance must be >= 1", {"code_distance": ["must be >= 1"]})

    def in_place_cost(self, kind: GateKind) -> Fraction:
        """Cycles for a gate executed on its own patch (Rz/T annotations are free)."""
        if kind == GateKind.H:
            return self.t_h
        if kind == GateKind.S:
            return self.t_s
        return Fraction(0)

    def replace(self, **changes: Any) -> "CostConfig":
        values = {f.name: getattr(self, f.name) for f in fields(self)}
        values.update(changes)
        return CostConfig(**values)

    def to_dict(self) -> Dict[str, Any]:
        data = asdict(self)
        for name in _TIME_FIELDS:
            data[name] = str(data[name])
        data["rotation_mode"] = self.rotation_mode.value
        return data


def cost_config_from_dict(data: Mapping[str, Any]) -> CostConfig:
    """Validate a plain mapping into a :class:`CostConfig`; unknown keys are rejected."""
    return validate_model(dict(data), CostConfig)


def load_cost_config(path: Union[str, Path], overrides: Optional[Mapping[str, Any]] = None) -> CostConfig:
    """
    Load a cost configuration from JSON or TOML.

    TOML files may nest the constants under a ``[cost]`` table.

    Args:
        path: ``.json`` or ``.toml`` file
        overrides: Values taking precedence over the file (CLI flags)
    """
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as e:
        raise ConfigError(f"Cannot read cost config {path}: {e}") from e
    try:
        if path.suffix.lower() == ".toml":
            data: Dict[str, Any] = tomllib.loads(text)
            data = data.get("cost", data)
        else:
            data = json.loads(text)
    except (ValueError, tomllib.TOMLDecodeError) as e:
        raise ConfigError(f"{path}: {e}") from e
    if not isinstance(data, dict):
        raise ConfigError(f"{path}: expected a table of cost constants")
    data.update(overrides or {})
    return cost_config_from_dict(data)


@dataclass(frozen=True)
class PathCost:
    total: Fraction
    rotation_cycles: Fraction
    turn_cycles: Fraction
    stage_breakdown: Tuple[Fraction, Fraction, Fraction, Fraction]

    def __post_init__(self) -> None:
        if self.total != sum(self.stage_breakdown) + self.turn_cycles:
            raise ValueError("PathCost total must equal its breakdown plus turn cycles")


def _step(a: Coord, b: Coord) -> str:
    if abs(a[0] - b[0]) + abs(a[1] - b[1]) != 1:
        raise RoutingError(f"Path cells {a} and {b} are not adjacent", {"from": list(a), "to": list(b)})
    return "h" if a[0] == b[0] else "v"


def required_orientations(path: Sequence[Coord]) -> Dict[Coord, Orientation]:
    """
    Orientation each interior cell must hold for the merge.

    A cell entered horizontally needs its Z boundary facing east/west; a
    cell entered vertically keeps the X boundary horizontal.
    """
    required = {}
    for prev, cell in zip(path[:-2], path[1:-1]):
        required[cell] = Orientation.Z_HORIZONTAL if _step(prev, cell) == "h" else Orientation.X_HORIZONTAL
    return required


def local_orientation(patch: Coord, cell: Coord) -> Orientation:
    """Orientation an ancilla adjacent to ``patch`` needs for a direct merge."""
    return Orientation.Z_HORIZONTAL if _step(patch, cell) == "h" else Orientation.X_HORIZONTAL


def count_turns(path: Sequence[Coord]) -> int:
    """Number of 90-degree direction changes along a full path."""
    steps = [_step(a, b) for a, b in zip(path, path[1:])]
    return sum(1 for a, b in zip(steps, steps[1:]) if a != b)


def _check_path(path: Sequence[Coord], grid: LayoutGrid) -> None:
    if len(path) < 3:
        raise RoutingError("A merge path needs two endpoint patches and at least one ancilla cell")
    for coord in path[1:-1]:
        if grid.role(coord) != CellRole.ANCILLA:
            raise RoutingError(f"Cell {coord} is not a routable ancilla", {"coord": list(coord)})
    for coord in (path[0], path[-1]):
        if grid.role(coord) not in (CellRole.DATA, CellRole.MAGIC_STATE):
            raise RoutingError(f"Endpoint {coord} is not a patch", {"coord": list(coord)})


def _rotation(mismatched: int, config: CostConfig) -> Fraction:
    if not mismatched:
        return Fraction(0)
    if config.rotation_mode == RotationMode.PER_SEGMENT:
        return config.t_rot_patch * mismatched
    return config.t_rot_patch


def merge_cost(
    path: Sequence[Coord],
    grid: LayoutGrid,
    config: CostConfig,
    orientations: Optional[Mapping[Coord, Orientation]] = None,
) -> PathCost:
    """
    Lattice-surgery CNOT latency along ``path``.

    Stages are ZZ merge, ancilla rotation, ZZ merge and XX merge, plus an
    optional per-turn flow penalty. Rotation is charged when any interior
    cell is misaligned with the orientation the route imposes.

    Args:
        path: ``[src_patch, *ancilla_cells, dst_patch]``
        grid: Layout (read only)
        config: Cost constants
        orientations: Orientation snapshot to evaluate against (default: grid's)

    Returns:
        PathCost
    """
    _check_path(path, grid)
    current = orientations if orientations is not None else None
    mismatched = 0
    for coord, needed in required_orientations(path).items():
        have = current[coord] if current is not None else grid.orientation(coord)
        if have != needed:
            mismatched += 1
    rotation = _rotation(mismatched, config)
    turns = config.c_flow_per_turn * count_turns(path)
    breakdown = (config.t_zz, rotation, config.t_zz, config.t_xx)
    return PathCost(sum(breakdown, Fraction(0)) + turns, rotation, turns, breakdown)


def local_merge_cost(patch: Coord, cell: Coord, grid: LayoutGrid, config: CostConfig) -> PathCost:
    """Cost of merging ``patch`` with one adjacent ancilla holding a cultivated state."""
    if grid.role(cell) != CellRole.ANCILLA:
        raise RoutingError(f"Cell {cell} is not a routable ancilla", {"coord": list(cell)})
    rotation = _rotation(int(grid.orientation(cell) != local_orientation(patch, cell)), config)
    breakdown = (config.t_zz, rotation, config.t_zz, config.t_xx)
    return PathCost(sum(breakdown, Fraction(0)), rotation, Fraction(0), breakdown)


def rz_sequence_cost(dec: RzDecomposition, tau_route: Any, config: CostConfig) -> Fraction:
    """``tau_route * n_t + t_s * n_s + t_h * n_h``."""
    tau = to_cycles(tau_route)
    if tau < 0:
        raise ValueError("tau_route must be nonnegative")
    return tau * dec.n_t + config.t_s * dec.n_s + config.t_h * dec.n_h


def batch_latency(batch_maxima: Iterable[Any], config: CostConfig) -> Fraction:
    """Sum of per-batch maxima plus one grid reset between consecutive batches."""
    maxima = [to_cycles(m) for m in batch_maxima]
    if not maxima:
        raise ValueError("batch_latency needs at least one batch")
    return sum(maxima, Fraction(0)) + config.c_reset * (len(maxima) - 1)

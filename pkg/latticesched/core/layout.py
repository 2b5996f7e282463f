"""
Surface-code layout grid.

Models patch roles, qubit placement, magic-state provisioning, cell
occupancy and the persistent boundary orientation map.

Floorplans (``D`` data, ``A`` ancilla, ``M`` magic state, ``#`` wall) are
built inside-out: an inner block per layout kind, an ancilla ring for
every kind except COMPACT, then an outer ring of walls in which the magic
state patches are cut. See ``docs/layouts.md`` for diagrams.
"""

import copy
import json
import math
from dataclasses import dataclass
from enum import Enum
from pathlib import Path
from typing import Any, Dict, FrozenSet, Hashable, Iterable, List, Mapping, Optional, Set, Tuple, Union

from .exceptions import ConfigError, LayoutError

Coord = Tuple[int, int]


class CellRole(str, Enum):
    DATA = "D"
    ANCILLA = "A"
    MAGIC_STATE = "M"
    WALL = "#"


class Orientation(str, Enum):
    """Which boundary type faces east/west."""

    X_HORIZONTAL = "x"
    Z_HORIZONTAL = "z"


class LayoutKind(str, Enum):
    COMPACT = "compact"
    HALF_FILLING = "half"
    TWO_THIRDS_FILLING = "twothirds"
    SQUARE_SPARSE = "sparse"


class MsDensity(str, Enum):
    ABUNDANT = "abundant"
    STARVED = "starved"


STARVED_MS_COUNT = 4


def manhattan(a: Coord, b: Coord) -> int:
    return abs(a[0] - b[0]) + abs(a[1] - b[1])


@dataclass
class Cell:
    coord: Coord
    role: CellRole
    occupant: Optional[Hashable] = None
    orientation: Orientation = Orientation.X_HORIZONTAL


class LayoutGrid:
    """
    Dense 2D grid of patches.

    Roles are fixed at construction; occupancy and orientation change as
    executors reserve routes and commit merges. A grid is owned by one
    executor at a time; executors work on a :meth:`copy`.

    Example:
        ```python
        grid = build_layout(LayoutKind.SQUARE_SPARSE, 4, MsDensity.STARVED)
        print(grid.render())
        ```
    """

    def __init__(
        self,
        rows: List[List[CellRole]],
        placement: Mapping[int, Coord],
        ms_patches: Optional[Iterable[Coord]] = None,
        kind: Optional[LayoutKind] = None,
        ms_density: Optional[MsDensity] = None,
    ):
        if not rows or not rows[0]:
            raise LayoutError("Layout must have at least one cell")
        self.height = len(rows)
        self.width = len(rows[0])
        if any(len(row) != self.width for row in rows):
            raise LayoutError("Layout rows differ in width")
        self.cells: List[List[Cell]] = [
            [Cell((r, c), CellRole(role)) for c, role in enumerate(row)] for r, row in enumerate(rows)
        ]
        self.placement: Dict[int, Coord] = {int(q): (int(rc[0]), int(rc[1])) for q, rc in placement.items()}
        if ms_patches is None:
            ms_patches = [cell.coord for row in self.cells for cell in row if cell.role == CellRole.MAGIC_STATE]
        self.ms_patches: List[Coord] = [tuple(m) for m in ms_patches]  # type: ignore[misc]
        self.kind = kind
        self.ms_density = ms_density
        self._reservations: Dict[Hashable, Set[Coord]] = {}

        self.ancilla: FrozenSet[Coord] = frozenset(
            cell.coord for row in self.cells for cell in row if cell.role == CellRole.ANCILLA
        )
        self._neighbors: Dict[Coord, Tuple[Coord, ...]] = {}
        for r in range(self.height):
            for c in range(self.width):
                # Lexicographic order: up, left, right, down
                candidates = [(r - 1, c), (r, c - 1), (r, c + 1), (r + 1, c)]
                self._neighbors[(r, c)] = tuple(n for n in candidates if self.in_bounds(n))

        violations = self.violations()
        if violations:
            raise LayoutError("Invalid layout", {"violations": violations})

    # Geometry

    def in_bounds(self, coord: Coord) -> bool:
        return 0 <= coord[0] < self.height and 0 <= coord[1] < self.width

    def cell(self, coord: Coord) -> Cell:
        if not self.in_bounds(coord):
            raise LayoutError(f"Coordinate {coord} out of bounds", {"coord": list(coord)})
        return self.cells[coord[0]][coord[1]]

    def role(self, coord: Coord) -> CellRole:
        return self.cell(coord).role

    def neighbors(self, coord: Coord) -> Tuple[Coord, ...]:
        return self._neighbors[coord]

    def ancilla_neighbors(self, coord: Coord) -> List[Coord]:
        return [n for n in self._neighbors[coord] if n in self.ancilla]

    def coord_of(self, qubit: int) -> Coord:
        try:
            return self.placement[qubit]
        except KeyError:
            raise LayoutError(f"Logical qubit {qubit} is not placed on the layout", {"qubit": qubit}) from None

    def data_cells(self) -> List[Coord]:
        return [cell.coord for row in self.cells for cell in row if cell.role == CellRole.DATA]

    def violations(self) -> List[str]:
        """Check the structural invariants, returning human-readable violations."""
        found = []
        seen: Dict[Coord, int] = {}
        for qubit, coord in sorted(self.placement.items()):
            if not self.in_bounds(coord) or self.role(coord) != CellRole.DATA:
                found.append(f"qubit {qubit} placed on non-DATA cell {coord}")
            if coord in seen:
                found.append(f"qubits {seen[coord]} and {qubit} share cell {coord}")
            seen[coord] = qubit
        for coord in self.ms_patches:
            if not self.in_bounds(coord) or self.role(coord) != CellRole.MAGIC_STATE:
                found.append(f"magic-state patch {coord} lacks MAGIC_STATE role")
        for coord in self.data_cells():
            if not self.ancilla_neighbors(coord):
                found.append(f"data cell {coord} has no adjacent ancilla")
        return found

    # Occupancy

    def is_free(self, coord: Coord) -> bool:
        cell = self.cell(coord)
        return cell.role != CellRole.WALL and cell.occupant is None

    def occupant(self, coord: Coord) -> Optional[Hashable]:
        return self.cell(coord).occupant

    def occupied(self) -> Set[Coord]:
        return {c for cells in self._reservations.values() for c in cells}

    def reserve(self, coords: Iterable[Coord], reservation_id: Hashable) -> List[Coord]:
        """
        Atomically occupy ``coords`` under ``reservation_id``.

        Returns:
            Conflicting coordinates; empty when the reservation succeeded.
            On conflict nothing is reserved.
        """
        coords = list(dict.fromkeys(coords))
        conflicts = [c for c in coords if not self.is_free(c)]
        if conflicts:
            return conflicts
        for c in coords:
            self.cell(c).occupant = reservation_id
        self._reservations.setdefault(reservation_id, set()).update(coords)
        return []

    def release(self, reservation_id: Hashable) -> List[Coord]:
        """Free every cell held by ``reservation_id``; returns the freed cells sorted."""
        cells = self._reservations.pop(reservation_id, set())
        for c in cells:
            self.cell(c).occupant = None
        return sorted(cells)

    # Orientation

    def orientation(self, coord: Coord) -> Orientation:
        return self.cell(coord).orientation

    def orientations(self) -> Dict[Coord, Orientation]:
        """Snapshot of the orientation map."""
        return {cell.coord: cell.orientation for row in self.cells for cell in row}

    def set_orientations(self, required: Mapping[Coord, Orientation]) -> None:
        for coord, orientation in required.items():
            self.cell(coord).orientation = Orientation(orientation)

    def copy(self) -> "LayoutGrid":
        return copy.deepcopy(self)

    # Serialization

    def role_rows(self) -> List[str]:
        return ["".join(cell.role.value for cell in row) for row in self.cells]

    def to_dict(self) -> Dict[str, Any]:
        return {
            "height": self.height,
            "width": self.width,
            "roles": self.role_rows(),
            "placement": {str(q): list(c) for q, c in sorted(self.placement.items())},
            "ms_patches": [list(m) for m in self.ms_patches],
            "kind": self.kind.value if self.kind else None,
            "ms_density": self.ms_density.value if self.ms_density else None,
        }

    def render(self) -> str:
        """ASCII picture with placed qubits shown as ``q`` and unused data cells as ``D``."""
        placed = set(self.placement.values())
        lines = []
        for row in self.cells:
            chars = []
            for cell in row:
                if cell.role == CellRole.DATA and cell.coord in placed:
                    chars.append("q")
                else:
                    chars.append(cell.role.value)
            lines.append("".join(chars))
        return "\n".join(lines)


def reserve_cells(grid: LayoutGrid, coords: Iterable[Coord], reservation_id: Hashable) -> List[Coord]:
    """Functional alias of :meth:`LayoutGrid.reserve`."""
    return grid.reserve(coords, reservation_id)


def release_cells(grid: LayoutGrid, reservation_id: Hashable) -> List[Coord]:
    return grid.release(reservation_id)


def update_orientation(grid: LayoutGrid, route_coords: Iterable[Coord], required: Mapping[Coord, Orientation]) -> None:
    """Commit the orientations a route imposed on its cells; the last writer wins."""
    grid.set_orientations({c: required[c] for c in route_coords if c in required})


def _inner_block(kind: LayoutKind, n_qubits: int) -> List[str]:
    cols = math.ceil(math.sqrt(n_qubits))
    data_rows = math.ceil(n_qubits / cols)

    if kind == LayoutKind.SQUARE_SPARSE:
        return [
            "".join("D" if r % 2 == 0 and c % 2 == 0 else "A" for c in range(2 * cols - 1))
            for r in range(2 * data_rows - 1)
        ]

    rows: List[str] = []
    for i in range(data_rows):
        if kind == LayoutKind.COMPACT:
            # Ancilla spine in column 0; data rows pair up around ancilla rows: D A D D A D ...
            rows.append("A" + "D" * cols)
            if i % 2 == 0:
                rows.append("A" * (cols + 1))
        elif kind == LayoutKind.HALF_FILLING:
            rows.append("D" * cols)
            if i < data_rows - 1:
                rows.append("A" * cols)
        else:
            rows.append("D" * cols)
            if i % 2 == 1 and i < data_rows - 1:
                rows.append("A" * cols)
    return rows


def _with_ring(rows: List[str], fill: str) -> List[str]:
    width = len(rows[0]) + 2
    return [fill * width] + [fill + row + fill for row in rows] + [fill * width]


def _ms_slots(core: List[str]) -> List[Coord]:
    """Outer-ring cells facing an ancilla, clockwise from the top-left (padded coordinates)."""
    h, w = len(core), len(core[0])
    slots = []
    for c in range(1, w + 1):
        if core[0][c - 1] == "A":
            slots.append((0, c))
    for r in range(1, h + 1):
        if core[r - 1][w - 1] == "A":
            slots.append((r, w + 1))
    for c in range(w, 0, -1):
        if core[h - 1][c - 1] == "A":
            slots.append((h + 1, c))
    for r in range(h, 0, -1):
        if core[r - 1][0] == "A":
            slots.append((r, 0))
    return slots


def _choose_ms(slots: List[Coord], count: int, density: MsDensity, h: int, w: int) -> List[Coord]:
    if density == MsDensity.ABUNDANT:
        return [slots[(i * len(slots)) // count] for i in range(count)]
    chosen: List[Coord] = []
    corners = [(0, 0), (0, w + 1), (h + 1, w + 1), (h + 1, 0)]
    order = {slot: i for i, slot in enumerate(slots)}
    for corner in corners:
        free = [s for s in slots if s not in chosen]
        chosen.append(min(free, key=lambda s: (manhattan(s, corner), order[s])))
    return chosen


def build_layout(kind: LayoutKind, n_qubits: int, ms_density: MsDensity) -> LayoutGrid:
    """
    Build the canonical floorplan for ``n_qubits`` logical qubits.

    Args:
        kind: Floorplan family
        n_qubits: Number of logical qubits (>= 1)
        ms_density: ABUNDANT (``max(4, n)`` patches spread clockwise along
            the boundary) or STARVED (4 patches nearest the corners)

    Returns:
        LayoutGrid with qubit ``i`` on the ``i``-th data cell in row-major order
    """
    if n_qubits < 1:
        raise ConfigError("n_qubits must be >= 1")
    kind = LayoutKind(kind)
    ms_density = MsDensity(ms_density)

    core = _inner_block(kind, n_qubits)
    if kind != LayoutKind.COMPACT:
        core = _with_ring(core, "A")
    needed = max(STARVED_MS_COUNT, n_qubits) if ms_density == MsDensity.ABUNDANT else STARVED_MS_COUNT
    slots = _ms_slots(core)
    while len(slots) < needed:
        core = _with_ring(core, "A")
        slots = _ms_slots(core)

    chosen = _choose_ms(slots, needed, ms_density, len(core), len(core[0]))
    ms = set(chosen)
    framed = _with_ring(core, "#")
    roles = [
        [CellRole.MAGIC_STATE if (r, c) in ms else CellRole(ch) for c, ch in enumerate(row)]
        for r, row in enumerate(framed)
    ]
    data = [(r, c) for r, row in enumerate(roles) for c, role in enumerate(row) if role == CellRole.DATA]
    placement = {q: data[q] for q in range(n_qubits)}
    return LayoutGrid(roles, placement, chosen, kind, ms_density)


def layout_from_rows(
    rows: List[str],
    placement: Optional[Mapping[int, Coord]] = None,
) -> LayoutGrid:
    """
    Build a custom grid from role characters.

    Without an explicit placement, qubit ``i`` goes to the ``i``-th data
    cell in row-major order.
    """
    try:
        roles = [[CellRole(ch) for ch in row] for row in rows]
    except ValueError as e:
        raise LayoutError(f"Unknown cell role: {e}") from e
    if placement is None:
        data = [(r, c) for r, row in enumerate(roles) for c, role in enumerate(row) if role == CellRole.DATA]
        placement = dict(enumerate(data))
    return LayoutGrid(roles, placement)


def layout_from_dict(data: Mapping[str, Any]) -> LayoutGrid:
    try:
        rows = [[CellRole(ch) for ch in row] for row in data["roles"]]
        placement = {int(q): (int(c[0]), int(c[1])) for q, c in data["placement"].items()}
        ms = [(int(m[0]), int(m[1])) for m in data.get("ms_patches", [])] or None
        kind = LayoutKind(data["kind"]) if data.get("kind") else None
        density = MsDensity(data["ms_density"]) if data.get("ms_density") else None
    except (KeyError, TypeError, ValueError) as e:
        raise ConfigError(f"Malformed layout document: {e}") from e
    grid = LayoutGrid(rows, placement, ms, kind, density)
    if (grid.height, grid.width) != (data.get("height", grid.height), data.get("width", grid.width)):
        raise ConfigError("Layout document dimensions disagree with its role matrix")
    return grid


def load_layout(path: Union[str, Path]) -> LayoutGrid:
    path = Path(path)
    try:
        document = json.loads(path.read_text(encoding="utf-8"))
    except OSError as e:
        raise ConfigError(f"Cannot read layout {path}: {e.strerror or e}") from e
    except json.JSONDecodeError as e:
        raise ConfigError(f"{path}: invalid JSON: {e}") from e
    return layout_from_dict(document)


def dump_layout(grid: LayoutGrid) -> str:
    return json.dumps(grid.to_dict(), indent=2, sort_keys=True) + "\n"

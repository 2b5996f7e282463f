"""
Ancilla path search.

BFS shortest paths under occupancy, approximate Steiner trees for fan-out
footprints and concurrent batch formation. All searches are deterministic:
among shortest paths the lexicographically smallest cell sequence wins.
"""

from collections import deque
from dataclasses import dataclass, field
from typing import Any, Callable, Dict, FrozenSet, Iterable, List, Optional, Sequence, Set, Tuple

from .cost import CostConfig, PathCost, merge_cost
from .exceptions import LayoutError
from .layout import Coord, LayoutGrid

Blocked = FrozenSet[Coord]


@dataclass(frozen=True)
class Route:
    """A committed-or-candidate path between two patches through ancilla cells."""

    gate_id: Optional[int]
    endpoints: Tuple[Coord, Coord]
    cells: Tuple[Coord, ...]
    cost: PathCost

    @property
    def path(self) -> Tuple[Coord, ...]:
        return (self.endpoints[0], *self.cells, self.endpoints[1])

    @property
    def footprint(self) -> FrozenSet[Coord]:
        return frozenset(self.cells)

    def __len__(self) -> int:
        return len(self.cells)


@dataclass(frozen=True)
class SteinerFootprint:
    """Cells reserved by one fan-out group, rooted at the control patch."""

    root: Coord
    terminals: Tuple[Coord, ...]
    tree_cells: FrozenSet[Coord]
    root_to_terminal_paths: Dict[Coord, Tuple[Coord, ...]] = field(hash=False, compare=False)

    def path(self, terminal: Coord) -> Tuple[Coord, ...]:
        """Full ``[root, *cells, terminal]`` path inside the tree."""
        return self.root_to_terminal_paths[terminal]


def _passable(grid: LayoutGrid, blocked: Iterable[Coord]) -> Callable[[Coord], bool]:
    blocked = frozenset(blocked)
    return lambda c: c in grid.ancilla and c not in blocked and grid.is_free(c)


def _distances(grid: LayoutGrid, goals: Iterable[Coord], passable: Callable[[Coord], bool]) -> Dict[Coord, int]:
    """Multi-source BFS: number of cells from each reachable cell to the nearest goal (goals count 1)."""
    dist: Dict[Coord, int] = {}
    queue: deque = deque()
    for g in sorted(set(goals)):
        if passable(g):
            dist[g] = 1
            queue.append(g)
    while queue:
        cur = queue.popleft()
        for nxt in grid.neighbors(cur):
            if nxt not in dist and passable(nxt):
                dist[nxt] = dist[cur] + 1
                queue.append(nxt)
    return dist


def _walk(grid: LayoutGrid, start: Coord, dist: Dict[Coord, int]) -> List[Coord]:
    """Follow strictly decreasing distance, taking the smallest coordinate at each step."""
    path = [start]
    cur = start
    while dist[cur] > 1:
        cur = min(n for n in grid.neighbors(cur) if dist.get(n) == dist[cur] - 1)
        path.append(cur)
    return path


def shortest_cells(
    grid: LayoutGrid,
    starts: Iterable[Coord],
    goals: Iterable[Coord],
    blocked: Iterable[Coord] = frozenset(),
) -> Optional[List[Coord]]:
    """Shortest free ancilla path from any start cell to any goal cell, or ``None``."""
    return shortest_cells_with(grid, starts, goals, _passable(grid, blocked))


def bfs_route(
    grid: LayoutGrid,
    src: Coord,
    dst: Coord,
    blocked: Iterable[Coord] = frozenset(),
    config: Optional[CostConfig] = None,
    gate_id: Optional[int] = None,
) -> Optional[Route]:
    """
    Shortest free ancilla path between two patches.

    Args:
        grid: Layout with current occupancy
        src: Source patch coordinate
        dst: Destination patch coordinate
        blocked: Extra cells to avoid on top of the grid's occupancy
        config: Cost constants used to price the route
        gate_id: Gate the route serves

    Returns:
        Route, or ``None`` when the patches are disconnected
    """
    cells = shortest_cells(grid, grid.ancilla_neighbors(src), grid.ancilla_neighbors(dst), blocked)
    if cells is None:
        return None
    cost = merge_cost([src, *cells, dst], grid, config or CostConfig())
    return Route(gate_id, (src, dst), tuple(cells), cost)


def _attachment(
    grid: LayoutGrid,
    root: Coord,
    tree: Set[Coord],
    terminal: Coord,
    passable: Callable[[Coord], bool],
) -> Optional[List[Coord]]:
    """New cells needed to connect ``terminal`` to the tree (or root), ``[]`` if already adjacent."""
    if any(n in tree for n in grid.neighbors(terminal)):
        return []
    outside = lambda c: passable(c) and c not in tree  # noqa: E731
    frontier = set(grid.neighbors(root))
    for cell in tree:
        frontier.update(grid.neighbors(cell))
    return shortest_cells_with(grid, frontier, grid.neighbors(terminal), outside)


def shortest_cells_with(
    grid: LayoutGrid,
    starts: Iterable[Coord],
    goals: Iterable[Coord],
    passable: Callable[[Coord], bool],
) -> Optional[List[Coord]]:
    dist = _distances(grid, goals, passable)
    reachable = [s for s in set(starts) if s in dist]
    if not reachable:
        return None
    start = min(reachable, key=lambda c: (dist[c], c))
    return _walk(grid, start, dist)


def _tree_paths(grid: LayoutGrid, root: Coord, tree: FrozenSet[Coord], terminals: Sequence[Coord]) -> Dict[Coord, Tuple[Coord, ...]]:
    inside = lambda c: c in tree  # noqa: E731
    paths = {}
    for terminal in terminals:
        cells = shortest_cells_with(grid, grid.neighbors(root), grid.neighbors(terminal), inside)
        if cells is None:
            raise LayoutError(f"Steiner tree does not reach terminal {terminal}")
        paths[terminal] = (root, *cells, terminal)
    return paths


class SteinerBuilder:
    """
    Incrementally grown Steiner tree.

    ``attach`` connects one terminal at a time against the current grid
    occupancy; :func:`steiner_tree` drives it in nearest-terminal order.
    """

    def __init__(self, grid: LayoutGrid, root: Coord, blocked: Iterable[Coord] = frozenset()):
        self.grid = grid
        self.root = root
        self.tree: Set[Coord] = set()
        self.terminals: List[Coord] = []
        self._passable = _passable(grid, blocked)

    def attachment(self, terminal: Coord) -> Optional[List[Coord]]:
        return _attachment(self.grid, self.root, self.tree, terminal, self._passable)

    def attach(self, terminal: Coord) -> bool:
        """Connect ``terminal``; returns False (tree unchanged) when unreachable."""
        if terminal in self.terminals:
            return True
        cells = self.attachment(terminal)
        if cells is None:
            return False
        self.tree.update(cells)
        self.terminals.append(terminal)
        return True

    def footprint(self) -> SteinerFootprint:
        tree = frozenset(self.tree)
        return SteinerFootprint(
            self.root, tuple(self.terminals), tree, _tree_paths(self.grid, self.root, tree, self.terminals)
        )


def steiner_tree(
    grid: LayoutGrid,
    root: Coord,
    terminals: Sequence[Coord],
    blocked: Iterable[Coord] = frozenset(),
) -> Optional[SteinerFootprint]:
    """
    Approximate Steiner tree by nearest-terminal attachment.

    Grows from the root patch; each round attaches the terminal needing
    the fewest new cells (ties by terminal order).

    Returns:
        SteinerFootprint, or ``None`` if any terminal is unreachable
    """
    if not terminals:
        raise ValueError("steiner_tree needs at least one terminal")
    builder = SteinerBuilder(grid, root, blocked)
    remaining = list(dict.fromkeys(terminals))
    while remaining:
        best: Optional[Tuple[int, int, List[Coord]]] = None
        for index, terminal in enumerate(remaining):
            cells = builder.attachment(terminal)
            if cells is None:
                return None
            if best is None or len(cells) < best[0]:
                best = (len(cells), index, cells)
        assert best is not None
        terminal = remaining.pop(best[1])
        builder.tree.update(best[2])
        builder.terminals.append(terminal)
    return builder.footprint()


@dataclass(frozen=True)
class BatchJob:
    """One routing job: reach ``target`` from one of ``sources``."""

    target: Coord
    sources: Tuple[Coord, ...]
    key: Any = None


Selector = Callable[[BatchJob, Blocked], Optional[Route]]


def form_batches(jobs: Sequence[BatchJob], grid: LayoutGrid, select: Selector) -> List[List[Tuple[BatchJob, Route]]]:
    """
    Greedily split jobs into batches of pairwise cell-disjoint routes.

    Jobs are tried in order; a job whose route collides with the current
    batch (cells or endpoint patches) is deferred to the next batch.

    Raises:
        LayoutError: a job cannot be routed even with nothing else in flight
    """
    pending = list(jobs)
    batches: List[List[Tuple[BatchJob, Route]]] = []
    while pending:
        blocked: Set[Coord] = set()
        batch: List[Tuple[BatchJob, Route]] = []
        deferred: List[BatchJob] = []
        for job in pending:
            if not job.sources:
                raise ValueError(f"Job for {job.target} has no candidate source")
            route = select(job, frozenset(blocked))
            if route is None:
                deferred.append(job)
                continue
            batch.append((job, route))
            blocked.update(route.cells)
            blocked.update(route.endpoints)
        if not batch:
            raise LayoutError(
                f"No route for target {deferred[0].target} even on an empty batch",
                {"target": list(deferred[0].target)},
            )
        batches.append(batch)
        pending = deferred
    return batches

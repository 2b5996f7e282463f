"""
Tests for ancilla path search, Steiner footprints and batch formation.
"""

import itertools
import random

import networkx as nx
import pytest

from latticesched.core.cost import CostConfig
from latticesched.core.exceptions import LayoutError
from latticesched.core.layout import LayoutGrid, layout_from_rows
from latticesched.core.routing import (
    BatchJob,
    SteinerBuilder,
    bfs_route,
    form_batches,
    shortest_cells,
    steiner_tree,
)


def _random_grid(rng, size, n_data):
    """Random grid of ancilla, walls and ``n_data`` data cells; None when invalid."""
    coords = [(r, c) for r in range(size) for c in range(size)]
    data = set(rng.sample(coords, n_data))
    rows = []
    for r in range(size):
        row = ""
        for c in range(size):
            if (r, c) in data:
                row += "D"
            else:
                row += "#" if rng.random() < 0.2 else "A"
        rows.append(row)
    try:
        return layout_from_rows(rows)
    except LayoutError:
        return None


def _ancilla_graph(grid: LayoutGrid, blocked=frozenset()):
    graph = nx.Graph()
    cells = [c for c in grid.ancilla if c not in blocked]
    graph.add_nodes_from(cells)
    for cell in cells:
        for n in grid.neighbors(cell):
            if n in graph:
                graph.add_edge(cell, n)
    return graph


def _reference_length(grid, src, dst, blocked=frozenset()):
    graph = _ancilla_graph(grid, blocked)
    best = None
    for a in grid.ancilla_neighbors(src):
        for b in grid.ancilla_neighbors(dst):
            if a in graph and b in graph and nx.has_path(graph, a, b):
                length = nx.shortest_path_length(graph, a, b) + 1
                best = length if best is None else min(best, length)
    return best


def _optimal_steiner_edges(grid, root, terminals):
    """Exhaustive optimum: fewest ancilla cells joining every terminal to the root."""
    ancilla = sorted(grid.ancilla)
    for size in range(len(ancilla) + 1):
        for subset in itertools.combinations(ancilla, size):
            chosen = set(subset)
            if not all(any(n in chosen for n in grid.neighbors(t)) for t in terminals):
                continue
            graph = nx.Graph()
            graph.add_node(root)
            graph.add_nodes_from(chosen)
            for cell in chosen:
                for n in grid.neighbors(cell):
                    if n in chosen or n == root:
                        graph.add_edge(cell, n)
            if nx.is_connected(graph):
                return size + len(terminals)
    return None


class TestBfsRoute:
    """Tests for bfs_route."""

    def test_adjacent_qubits(self, sparse4):
        """Test neighbouring qubits route through their shared ancilla."""
        route = bfs_route(sparse4, (2, 2), (2, 4), gate_id=5)
        assert route.cells == ((2, 3),)
        assert route.path == ((2, 2), (2, 3), (2, 4))
        assert route.cost.total == 4
        assert route.gate_id == 5
        assert len(route) == 1

    def test_blocked_detour(self, sparse4):
        """Test a blocked shared ancilla forces the lexicographically first detour."""
        route = bfs_route(sparse4, (2, 2), (2, 4), blocked={(2, 3)})
        assert route.cells == ((1, 2), (1, 3), (1, 4))

    def test_occupied_cells_are_avoided(self, sparse4):
        """Test grid occupancy blocks routes like explicit blocks."""
        sparse4.reserve([(2, 3)], "op0")
        assert (2, 3) not in bfs_route(sparse4, (2, 2), (2, 4)).cells

    def test_disconnected(self, sparse4):
        """Test None when every ancilla around a patch is blocked."""
        assert bfs_route(sparse4, (2, 2), (2, 4), blocked=set(sparse4.ancilla_neighbors((2, 2)))) is None

    def test_deterministic(self, sparse5):
        """Test repeated searches give the same path."""
        first = bfs_route(sparse5, (2, 4), (4, 2))
        assert all(bfs_route(sparse5, (2, 4), (4, 2)) == first for _ in range(5))

    def test_priced_with_config(self, corridor):
        """Test the route cost uses the given constants."""
        route = bfs_route(corridor, (3, 1), (1, 1), config=CostConfig(c_flow_per_turn=1))
        assert route.cells == ((3, 2), (2, 2), (1, 2))
        assert route.cost.total == 6

    @pytest.mark.parametrize("size", [4, 5])
    @pytest.mark.parametrize("seed", range(250))
    def test_shortest_against_reference(self, seed, size):
        """Test path lengths against an independent shortest-path search."""
        rng = random.Random(seed * 10 + size)
        grid = None
        while grid is None:
            grid = _random_grid(rng, size, 2)
        src, dst = grid.placement[0], grid.placement[1]
        blocked = frozenset(c for c in grid.ancilla if rng.random() < 0.15)
        route = bfs_route(grid, src, dst, blocked=blocked)
        expected = _reference_length(grid, src, dst, blocked)
        if expected is None:
            assert route is None
        else:
            assert len(route.cells) == expected
            assert not set(route.cells) & blocked
            path = route.path
            assert all(abs(a[0] - b[0]) + abs(a[1] - b[1]) == 1 for a, b in zip(path, path[1:]))


class TestShortestCells:
    """Tests for shortest_cells."""

    def test_same_start_and_goal(self, sparse4):
        """Test a cell that is both start and goal is a one-cell path."""
        assert shortest_cells(sparse4, [(2, 3)], [(2, 3)]) == [(2, 3)]

    def test_blocked_start(self, sparse4):
        """Test blocked starts are unusable."""
        assert shortest_cells(sparse4, [(2, 3)], [(3, 3)], blocked={(2, 3)}) is None


class TestSteinerTree:
    """Tests for Steiner footprints."""

    def test_star_footprint(self, sparse5):
        """Test a four-target footprint reaches every terminal from the root."""
        root = sparse5.coord_of(1)
        terminals = [sparse5.coord_of(q) for q in (0, 2, 3, 4)]
        footprint = steiner_tree(sparse5, root, terminals)
        assert set(footprint.terminals) == set(terminals)
        for terminal in terminals:
            path = footprint.path(terminal)
            assert path[0] == root and path[-1] == terminal
            assert set(path[1:-1]) <= footprint.tree_cells
        assert footprint.tree_cells <= sparse5.ancilla

    def test_no_terminals(self, sparse4):
        """Test a footprint needs a terminal."""
        with pytest.raises(ValueError):
            steiner_tree(sparse4, (2, 2), [])

    def test_unreachable(self, sparse4):
        """Test None when a terminal is walled off."""
        blocked = set(sparse4.ancilla_neighbors((4, 4)))
        assert steiner_tree(sparse4, (2, 2), [(2, 4), (4, 4)], blocked=blocked) is None

    def test_builder_attach(self, sparse4):
        """Test incremental attachment and its failure mode."""
        builder = SteinerBuilder(sparse4, (2, 2))
        assert builder.attach((2, 4))
        assert builder.tree == {(2, 3)}
        assert builder.attach((2, 4))
        sparse4.reserve(sparse4.ancilla_neighbors((4, 4)), "op0")
        assert not builder.attach((4, 4))
        assert builder.terminals == [(2, 4)]

    @pytest.mark.parametrize("seed", range(30))
    def test_within_twice_optimal(self, seed):
        """Test footprints stay within twice the exhaustive optimum on small grids."""
        rng = random.Random(1000 + seed)
        grid = None
        while grid is None:
            grid = _random_grid(rng, 4, rng.randint(2, 5))
        root = grid.placement[0]
        terminals = [grid.placement[q] for q in sorted(grid.placement) if q != 0]
        footprint = steiner_tree(grid, root, terminals)
        optimum = _optimal_steiner_edges(grid, root, terminals)
        if optimum is None:
            assert footprint is None
        else:
            assert len(footprint.tree_cells) + len(terminals) <= 2 * optimum


class TestFormBatches:
    """Tests for batch formation."""

    def _select(self, grid):
        def select(job, blocked):
            routes = [bfs_route(grid, s, job.target, blocked=blocked) for s in job.sources if s not in blocked]
            routes = [r for r in routes if r is not None]
            return min(routes, key=lambda r: (len(r), r.endpoints)) if routes else None
        return select

    def test_disjoint_routes_share_a_batch(self, sparse4):
        """Test far-apart jobs run together."""
        jobs = [BatchJob((2, 2), ((0, 1),), key=0), BatchJob((4, 4), ((6, 5),), key=1)]
        batches = form_batches(jobs, sparse4, self._select(sparse4))
        assert len(batches) == 1

    def test_conflicting_routes_split(self, sparse4):
        """Test jobs competing for one patch land in separate batches."""
        jobs = [BatchJob((2, 2), ((0, 1),), key=0), BatchJob((2, 4), ((0, 1),), key=1)]
        batches = form_batches(jobs, sparse4, self._select(sparse4))
        assert [[job.key for job, _ in batch] for batch in batches] == [[0], [1]]

    def test_batches_are_cell_disjoint(self, sparse5):
        """Test routes inside each batch never share cells."""
        targets = [sparse5.coord_of(q) for q in range(5)]
        jobs = [BatchJob(t, tuple(sparse5.ms_patches), key=i) for i, t in enumerate(targets)]
        for batch in form_batches(jobs, sparse5, self._select(sparse5)):
            seen = set()
            for _, route in batch:
                cells = set(route.cells) | {route.endpoints[0]}
                assert not cells & seen
                seen |= cells

    def test_unroutable_job(self, sparse4):
        """Test a job that cannot route even alone."""
        with pytest.raises(LayoutError):
            form_batches([BatchJob((2, 2), ((0, 1),))], sparse4, lambda job, blocked: None)

    def test_job_without_sources(self, sparse4):
        """Test jobs need a candidate source."""
        with pytest.raises(ValueError):
            form_batches([BatchJob((2, 2), ())], sparse4, self._select(sparse4))

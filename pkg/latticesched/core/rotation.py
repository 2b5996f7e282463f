"""
Stage-B rotation realization.

Three regimes realize the target rotation of each group member:

* ``eft``: continuous-angle injection through one adjacent ancilla
* ``fft-msd``: Clifford+T synthesis with every T routed from a
  distilled magic-state patch
* ``fft-msc``: Clifford+T synthesis with T states cultivated in place on
  an adjacent ancilla

The planners here never commit anything; the owning executor reserves
the returned cells.
"""

from dataclasses import dataclass, field, replace
from enum import Enum
from fractions import Fraction
from typing import Dict, FrozenSet, Iterable, List, Optional, Tuple

from .cost import (
    CostConfig,
    batch_latency,
    local_merge_cost,
    local_orientation,
    required_orientations,
    rz_sequence_cost,
)
from .exceptions import ConfigError
from .layout import Coord, LayoutGrid, Orientation, manhattan
from .routing import BatchJob, Route, bfs_route, form_batches
from .synthesis import RzDecomposition, SynthesisProvider, SynthesisTable, synthesize_rz


class Regime(str, Enum):
    EFT_INJECT = "eft"
    FFT_MSD = "fft-msd"
    FFT_MSC = "fft-msc"


@dataclass(frozen=True)
class RotationSettings:
    """Regime plus synthesis parameters shared by every job of a run."""

    regime: Regime = Regime.EFT_INJECT
    epsilon: int = 6
    provider: SynthesisProvider = SynthesisProvider.MODEL
    table: Optional[SynthesisTable] = field(default=None, compare=False)

    def job(self, target: int, angle: float, gate_id: Optional[int] = None) -> "RotationJob":
        decomposition = None
        if self.regime != Regime.EFT_INJECT:
            decomposition = synthesize_rz(angle, self.epsilon, self.provider, self.table)
        return RotationJob(target, angle, Regime(self.regime), decomposition, gate_id=gate_id)

    def decompose(self, angle: float) -> RzDecomposition:
        return synthesize_rz(angle, self.epsilon, self.provider, self.table)


@dataclass(frozen=True)
class RotationJob:
    """
    One target rotation.

    After realization ``assigned_ancilla`` (EFT/MSC) or ``route`` (MSD)
    names the reserved cells and ``duration`` the cycles they are held.
    A job with neither is stalled and must be retried later.
    """

    target: int
    angle: float
    regime: Regime
    decomposition: Optional[RzDecomposition] = None
    assigned_ancilla: Optional[Coord] = None
    duration: Fraction = Fraction(0)
    gate_id: Optional[int] = None
    route: Optional[Route] = None
    waits: Tuple[Fraction, ...] = ()
    orientation_updates: Dict[Coord, Orientation] = field(default_factory=dict, compare=False)

    def __post_init__(self) -> None:
        if self.regime != Regime.EFT_INJECT and self.decomposition is None:
            raise ValueError(f"{self.regime.value} job on qubit {self.target} needs a decomposition")

    @property
    def needs_cells(self) -> bool:
        if self.regime == Regime.EFT_INJECT:
            return True
        return self.decomposition is not None and self.decomposition.n_t > 0

    @property
    def stalled(self) -> bool:
        return self.needs_cells and self.assigned_ancilla is None and self.route is None

    @property
    def cells(self) -> Tuple[Coord, ...]:
        """Cells the job holds for its whole duration (MS patch included)."""
        if self.route is not None:
            return (self.route.endpoints[0], *self.route.cells)
        if self.assigned_ancilla is not None:
            return (self.assigned_ancilla,)
        return ()


@dataclass(frozen=True)
class MsSelection:
    target: Coord
    candidates: Tuple[Coord, ...]
    chosen: Coord
    chosen_cost: Fraction
    k: int
    route: Route


class CultivationTracker:
    """
    Background cultivation clock per ancilla cell.

    A cell cultivates whenever it is not reserved; a consumption may start
    once ``t_cult`` cycles have passed since the cell was last released.
    """

    def __init__(self) -> None:
        self._last_reset: Dict[Coord, Fraction] = {}

    def last_reset(self, cell: Coord) -> Fraction:
        return self._last_reset.get(cell, Fraction(0))

    def ready_at(self, cell: Coord, config: CostConfig) -> Fraction:
        return self.last_reset(cell) + config.t_cult

    def reset(self, cells: Iterable[Coord], time: Fraction) -> None:
        for cell in cells:
            self._last_reset[cell] = max(self.last_reset(cell), time)


def _free_adjacent(grid: LayoutGrid, coord: Coord, exclude: Iterable[Coord]) -> List[Coord]:
    exclude = frozenset(exclude)
    return [c for c in grid.ancilla_neighbors(coord) if grid.is_free(c) and c not in exclude]


def realize_eft(
    job: RotationJob,
    grid: LayoutGrid,
    config: CostConfig,
    exclude: Iterable[Coord] = frozenset(),
) -> RotationJob:
    """
    Assign the lowest free adjacent ancilla for one injection window.

    Args:
        job: EFT job
        grid: Layout with current occupancy
        config: Cost constants (``t_rz_inject``)
        exclude: Ancillas already claimed by simultaneous injections

    Returns:
        Realized job, or a stalled copy when no adjacent ancilla is free
    """
    if job.regime != Regime.EFT_INJECT:
        raise ValueError(f"realize_eft got a {job.regime.value} job")
    free = _free_adjacent(grid, grid.coord_of(job.target), exclude)
    if not free:
        return replace(job, assigned_ancilla=None, duration=Fraction(0))
    return replace(job, assigned_ancilla=min(free), duration=config.t_rz_inject)


def select_ms_patch(
    target: Coord,
    grid: LayoutGrid,
    config: CostConfig,
    k: Optional[int] = None,
    blocked: Iterable[Coord] = frozenset(),
) -> Optional[MsSelection]:
    """
    Pick the magic-state patch with the cheapest route to ``target``.

    The ``k`` nearest free patches by Manhattan distance (ties by
    coordinate) are priced with the full merge cost along their BFS
    routes. ``k=1`` is plain nearest-patch selection.

    Returns:
        MsSelection, or ``None`` when no candidate is currently routable
    """
    if not grid.ms_patches:
        raise ConfigError("Layout has no magic-state patches")
    k = config.ms_candidates if k is None else k
    if k < 1:
        raise ValueError("k must be >= 1")
    blocked = frozenset(blocked)
    available = [m for m in grid.ms_patches if m not in blocked and grid.is_free(m)]
    candidates = tuple(sorted(available, key=lambda m: (manhattan(m, target), m))[:k])
    best: Optional[Route] = None
    for patch in candidates:
        route = bfs_route(grid, patch, target, blocked=blocked, config=config)
        if route is not None and (best is None or route.cost.total < best.cost.total):
            best = route
    if best is None:
        return None
    return MsSelection(target, candidates, best.endpoints[0], best.cost.total, k, best)


def realize_msd_group(
    jobs: List[RotationJob],
    grid: LayoutGrid,
    config: CostConfig,
    k: Optional[int] = None,
) -> Tuple[List[List[RotationJob]], Fraction]:
    """
    Batch the T-routes of one group's MSD jobs.

    Each job holds its route for ``tau = tau_route * n_t + t_s * n_s +
    t_h * n_h``. Jobs are split into batches of cell-disjoint routes; the
    stage span is the batch latency of the per-batch maxima. Jobs without
    T gates need no route and join the first batch.

    Returns:
        ``(batches, span)``
    """
    for job in jobs:
        if job.regime != Regime.FFT_MSD or job.decomposition is None:
            raise ValueError("realize_msd_group expects FFT_MSD jobs with decompositions")
    routed = [j for j in jobs if j.decomposition.n_t > 0]  # type: ignore[union-attr]
    local = [j for j in jobs if j.decomposition.n_t == 0]  # type: ignore[union-attr]

    def select(batch_job: BatchJob, blocked: FrozenSet[Coord]) -> Optional[Route]:
        selection = select_ms_patch(batch_job.target, grid, config, k, blocked)
        return selection.route if selection else None

    batch_jobs = [BatchJob(grid.coord_of(j.target), tuple(grid.ms_patches), key=i) for i, j in enumerate(routed)]
    batches: List[List[RotationJob]] = []
    for batch in form_batches(batch_jobs, grid, select) if batch_jobs else []:
        realized = []
        for batch_job, route in batch:
            job = routed[batch_job.key]
            realized.append(replace(
                job,
                route=Route(job.gate_id, route.endpoints, route.cells, route.cost),
                duration=rz_sequence_cost(job.decomposition, route.cost.total, config),  # type: ignore[arg-type]
                orientation_updates=required_orientations(route.path),
            ))
        batches.append(realized)
    if local:
        tails = [replace(j, duration=rz_sequence_cost(j.decomposition, 0, config)) for j in local]  # type: ignore[arg-type]
        if batches:
            batches[0].extend(tails)
        else:
            batches.append(tails)
    if not batches:
        return [], Fraction(0)
    return batches, batch_latency([max(j.duration for j in b) for b in batches], config)


def realize_msc(
    job: RotationJob,
    grid: LayoutGrid,
    config: CostConfig,
    now: Fraction,
    tracker: CultivationTracker,
    exclude: Iterable[Coord] = frozenset(),
) -> RotationJob:
    """
    Consume cultivated T states on one adjacent ancilla.

    The site is the free adjacent ancilla that finishes cultivating first
    (ties by coordinate). Each T waits until the site has cultivated for
    ``t_cult`` cycles since its last consumption, then merges locally. The
    S/H tail follows in place.

    Returns:
        Realized job with per-T ``waits``; stalled copy when no site is free
    """
    if job.regime != Regime.FFT_MSC or job.decomposition is None:
        raise ValueError("realize_msc expects an FFT_MSC job with a decomposition")
    dec = job.decomposition
    tail = config.t_s * dec.n_s + config.t_h * dec.n_h
    if dec.n_t == 0:
        return replace(job, duration=tail)

    patch = grid.coord_of(job.target)
    free = _free_adjacent(grid, patch, exclude)
    if not free:
        return replace(job, assigned_ancilla=None, duration=Fraction(0))
    site = min(free, key=lambda c: (tracker.ready_at(c, config), c))

    merge = local_merge_cost(patch, site, grid, config)
    first, aligned = merge.total, merge.total - merge.rotation_cycles
    t = Fraction(now)
    last_reset = tracker.last_reset(site)
    waits = []
    for index in range(dec.n_t):
        start = max(t, last_reset + config.t_cult)
        waits.append(start - t)
        t = start + (first if index == 0 else aligned)
        last_reset = t
    duration = t + tail - now
    return replace(
        job,
        assigned_ancilla=site,
        duration=duration,
        waits=tuple(waits),
        orientation_updates={site: local_orientation(patch, site)},
    )

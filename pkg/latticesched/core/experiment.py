"""
Experiment harness.

Builds circuits and layouts from an :class:`ExperimentConfig`, runs every
requested executor per seed, validates each schedule, and aggregates the
results into a deterministic :class:`CompilationReport`.
"""

import json
import math
import time
from dataclasses import dataclass, field
from enum import Enum
from fractions import Fraction
from pathlib import Path
from typing import Any, Dict, List, Optional, Tuple, Union

from .circuit import LogicalCircuit, gen_qaoa, gen_qft, load_circuit
from .cost import CostConfig, cost_config_from_dict, load_cost_config
from .exceptions import ConfigError, LayoutError, OutputError, ScheduleValidationError
from .greedy import greedy_compile
from .grouping import GroupPlan, pack_groups, plan_circuit
from .layout import LayoutGrid, LayoutKind, MsDensity, build_layout, dump_layout, load_layout
from .logging import get_logger
from .oracle import verify_schedule
from .parallel import run_parallel
from .rotation import Regime, RotationSettings
from .schedule import EventSchedule, check_schedule, format_cycles
from .scheduler import execute_pipeline
from .slices import execute_slices
from .synthesis import SynthesisProvider, SynthesisTable
from .validation import validate_model

SCHEMA_VERSION = 1
ORACLE_MAX_QUBITS = 6


class Benchmark(str, Enum):
    QAOA = "qaoa"
    QFT = "qft"
    FILE = "file"


class Mode(str, Enum):
    GREEDY = "greedy"
    SLICE = "slice"
    PIPELINED = "pipelined"


@dataclass
class ExperimentConfig:
    """
    One experiment: a benchmark family on one layout under one regime.

    Example:
        ```python
        config = validate_model({"benchmark": "qft", "n_qubits": 8, "modes": "greedy,pipelined"}, ExperimentConfig)
        ```
    """

    benchmark: Benchmark = Benchmark.QAOA
    n_qubits: int = 4
    layout: LayoutKind = LayoutKind.SQUARE_SPARSE
    ms_density: MsDensity = MsDensity.ABUNDANT
    regime: Regime = Regime.EFT_INJECT
    precision: int = 6
    modes: List[Mode] = field(default_factory=lambda: [Mode.GREEDY, Mode.SLICE, Mode.PIPELINED])
    seeds: List[int] = field(default_factory=lambda: [0])
    edge_prob: float = 0.5
    circuit_file: Optional[str] = None
    layout_file: Optional[str] = None
    provider: SynthesisProvider = SynthesisProvider.MODEL
    synthesis_file: Optional[str] = None
    cost_config: Optional[str] = None
    cost: Dict[str, Any] = field(default_factory=dict)
    out_dir: Optional[str] = None
    verify: bool = False
    dump_groups: bool = False
    workers: int = 1

    def __post_init__(self) -> None:
        errors: Dict[str, List[str]] = {}
        for name, enum in (("benchmark", Benchmark), ("layout", LayoutKind), ("ms_density", MsDensity),
                           ("regime", Regime), ("provider", SynthesisProvider)):
            try:
                setattr(self, name, enum(getattr(self, name)))
            except ValueError:
                errors[name] = [f"must be one of {', '.join(e.value for e in enum)}"]
        try:
            self.modes = list(dict.fromkeys(Mode(m) for m in self.modes))
        except ValueError:
            errors["modes"] = [f"must be a subset of {', '.join(m.value for m in Mode)}"]
            self.modes = [Mode.GREEDY]
        if not self.modes:
            errors["modes"] = ["at least one mode is required"]
        if not self.seeds:
            errors["seeds"] = ["at least one seed is required"]
        if self.benchmark == Benchmark.FILE and not self.circuit_file:
            errors["circuit_file"] = ["required for the file benchmark"]
        if self.benchmark != Benchmark.FILE and self.n_qubits < 1:
            errors["n_qubits"] = ["must be >= 1"]
        if self.benchmark == Benchmark.QAOA and self.n_qubits < 2:
            errors["n_qubits"] = ["qaoa needs at least 2 qubits"]
        if self.precision < 1:
            errors["precision"] = ["must be >= 1"]
        if self.provider == SynthesisProvider.FILE and not self.synthesis_file:
            errors["synthesis_file"] = ["required for the file provider"]
        if self.workers < 1:
            errors["workers"] = ["must be >= 1"]
        if errors:
            raise ConfigError("Invalid ExperimentConfig", errors)

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "ExperimentConfig":
        return validate_model(data, cls)

    def cost_model(self) -> CostConfig:
        if self.cost_config:
            return load_cost_config(self.cost_config, self.cost)
        return cost_config_from_dict(self.cost)

    def rotation_settings(self) -> RotationSettings:
        table = SynthesisTable.load(self.synthesis_file) if self.synthesis_file else None
        return RotationSettings(self.regime, self.precision, self.provider, table)

    def to_dict(self) -> Dict[str, Any]:
        return {
            "benchmark": self.benchmark.value,
            "n_qubits": self.n_qubits,
            "layout": self.layout.value,
            "ms_density": self.ms_density.value,
            "regime": self.regime.value,
            "precision": self.precision,
            "modes": [m.value for m in self.modes],
            "seeds": list(self.seeds),
            "edge_prob": self.edge_prob,
            "circuit_file": Path(self.circuit_file).name if self.circuit_file else None,
            "layout_file": Path(self.layout_file).name if self.layout_file else None,
            "provider": self.provider.value,
        }


@dataclass
class RunRow:
    seed: int
    mode: Mode
    cycles: Fraction
    counts: Dict[str, int] = field(default_factory=dict)
    stage_b_cycles: Fraction = Fraction(0)

    def to_dict(self) -> Dict[str, Any]:
        share = float(self.stage_b_cycles / self.cycles) if self.cycles else 0.0
        return {
            "seed": self.seed,
            "mode": self.mode.value,
            "cycles": math.ceil(self.cycles),
            "cycles_exact": format_cycles(self.cycles),
            "counts": dict(sorted(self.counts.items())),
            "stage_b_cycles": format_cycles(self.stage_b_cycles),
            "stage_b_share": round(share, 6),
        }


def geomean(values: List[float]) -> float:
    """``(prod values) ** (1/n)``, computed in log space."""
    if not values:
        raise ValueError("geomean needs at least one value")
    return math.exp(sum(math.log(v) for v in values) / len(values))


@dataclass
class CompilationReport:
    config: Dict[str, Any]
    cost: Dict[str, Any]
    runs: List[RunRow]
    schema_version: int = SCHEMA_VERSION

    def cycles(self, seed: int, mode: Mode) -> Optional[Fraction]:
        for row in self.runs:
            if row.seed == seed and row.mode == mode:
                return row.cycles
        return None

    def speedups(self) -> List[Dict[str, Any]]:
        """Per-seed ``cycles(greedy) / cycles(mode)``; empty without a greedy run."""
        rows = []
        for row in self.runs:
            baseline = self.cycles(row.seed, Mode.GREEDY)
            if baseline is None or not row.cycles:
                continue
            ratio = baseline / row.cycles
            rows.append({
                "seed": row.seed,
                "mode": row.mode.value,
                "speedup": round(float(ratio), 6),
                "speedup_exact": format_cycles(ratio),
            })
        return rows

    def geomean_speedups(self) -> Dict[str, float]:
        by_mode: Dict[str, List[float]] = {}
        for row in self.speedups():
            by_mode.setdefault(row["mode"], []).append(float(Fraction(row["speedup_exact"])))
        return {mode: round(geomean(values), 6) for mode, values in sorted(by_mode.items())}

    def to_dict(self) -> Dict[str, Any]:
        return {
            "schema_version": self.schema_version,
            "config": self.config,
            "cost": self.cost,
            "runs": [r.to_dict() for r in self.runs],
            "speedups": self.speedups(),
            "geomean_speedup": self.geomean_speedups(),
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True) + "\n"


@dataclass
class ExperimentResult:
    report: CompilationReport
    schedules: Dict[Tuple[int, str], EventSchedule]
    grid: LayoutGrid
    plans: Dict[int, GroupPlan] = field(default_factory=dict)
    timings: Dict[str, float] = field(default_factory=dict)


@dataclass
class _Outcome:
    schedule: EventSchedule
    plan: Optional[GroupPlan]
    seconds: float


def build_circuit(config: ExperimentConfig, seed: int) -> LogicalCircuit:
    if config.benchmark == Benchmark.QAOA:
        return gen_qaoa(config.n_qubits, config.edge_prob, seed)
    if config.benchmark == Benchmark.QFT:
        return gen_qft(config.n_qubits)
    try:
        return load_circuit(config.circuit_file)  # type: ignore[arg-type]
    except OSError as e:
        raise ConfigError(f"Cannot read circuit {config.circuit_file}: {e.strerror or e}") from e
    except ValueError as e:
        raise ConfigError(f"{config.circuit_file}: {e}") from e


def build_grid(config: ExperimentConfig, num_qubits: int) -> LayoutGrid:
    if config.layout_file:
        grid = load_layout(config.layout_file)
    else:
        grid = build_layout(config.layout, num_qubits, config.ms_density)
    missing = [q for q in range(num_qubits) if q not in grid.placement]
    if missing:
        raise LayoutError(f"Layout places no patch for qubits {missing}", {"qubits": missing})
    return grid


def compile_once(
    mode: Mode,
    circuit: LogicalCircuit,
    grid: LayoutGrid,
    cost: CostConfig,
    settings: RotationSettings,
    verify: bool = False,
) -> Tuple[EventSchedule, Optional[GroupPlan]]:
    """
    Run one executor and validate its schedule.

    Raises:
        ScheduleValidationError: the schedule breaks an invariant or fails the oracle
    """
    plan = None
    if mode == Mode.GREEDY:
        result = greedy_compile(circuit, grid, cost, settings)
        schedule = result.schedule
        if result.recomputed_total() != result.total_cycles:
            raise ScheduleValidationError("Greedy total differs from its round sum", [
                f"rounds sum to {format_cycles(result.recomputed_total())}, total {format_cycles(result.total_cycles)}"
            ])
    elif mode == Mode.SLICE:
        plan = pack_groups(plan_circuit(circuit, grid, cost), grid, cost)
        slices = execute_slices(circuit, plan, grid, cost, settings)
        schedule = slices.to_event_schedule()
        if slices.recomputed_total() != slices.total_cycles:
            raise ScheduleValidationError("Slice total differs from its slice sum", [
                f"slices sum to {format_cycles(slices.recomputed_total())}, total {format_cycles(slices.total_cycles)}"
            ])
    else:
        schedule = execute_pipeline(circuit, grid, cost, settings)

    violations = check_schedule(schedule, grid, circuit)
    if violations:
        raise ScheduleValidationError(f"{mode.value} schedule for {circuit.name} is invalid", violations)
    if verify and circuit.num_qubits <= ORACLE_MAX_QUBITS:
        equal, deviation = verify_schedule(schedule, circuit)
        if not equal:
            raise ScheduleValidationError(
                f"{mode.value} schedule for {circuit.name} does not reproduce the circuit unitary",
                [f"max elementwise deviation {deviation:.3e}"],
            )
    return schedule, plan


def run_experiment(config: ExperimentConfig) -> ExperimentResult:
    """
    Run every (seed, mode) of ``config``.

    Returns:
        ExperimentResult with the report, the schedules keyed by ``(seed, mode)``,
        the layout and, for slice runs, the packed group plans

    Raises:
        ConfigError: invalid cost or synthesis inputs
        LayoutError: the circuit does not fit the layout
        ScheduleValidationError: any schedule fails validation
    """
    logger = get_logger()
    cost = config.cost_model()
    settings = config.rotation_settings()
    circuits = {seed: build_circuit(config, seed) for seed in config.seeds}
    grid = build_grid(config, max(c.num_qubits for c in circuits.values()))

    def job(seed: int, mode: Mode):
        def run() -> _Outcome:
            started = time.perf_counter()
            schedule, plan = compile_once(mode, circuits[seed], grid, cost, settings, config.verify)
            return _Outcome(schedule, plan, time.perf_counter() - started)
        return run

    jobs = {(seed, mode.value): job(seed, mode) for seed in config.seeds for mode in config.modes}
    outcomes = run_parallel(jobs, config.workers)

    runs: List[RunRow] = []
    schedules: Dict[Tuple[int, str], EventSchedule] = {}
    plans: Dict[int, GroupPlan] = {}
    timings: Dict[str, float] = {}
    for (seed, mode_name), outcome in sorted(outcomes.items()):
        schedule = outcome.schedule
        schedules[(seed, mode_name)] = schedule
        timings[f"{mode_name}_seed{seed}"] = outcome.seconds
        if outcome.plan is not None:
            plans[seed] = outcome.plan
        runs.append(RunRow(seed, Mode(mode_name), schedule.total_cycles, dict(schedule.counts),
                           schedule.stage_b_cycles()))
        logger.info("Run complete", seed=seed, mode=mode_name, cycles=format_cycles(schedule.total_cycles))

    if config.dump_groups:
        for seed in config.seeds:
            if seed not in plans:
                plans[seed] = pack_groups(plan_circuit(circuits[seed], grid, cost), grid, cost)

    order = {m: i for i, m in enumerate(Mode)}
    runs.sort(key=lambda r: (r.seed, order[r.mode]))
    report = CompilationReport(config.to_dict(), cost.to_dict(), runs)
    return ExperimentResult(report, schedules, grid, plans, timings)


def _write(path: Path, text: str) -> Path:
    try:
        path.write_text(text, encoding="utf-8")
    except OSError as e:
        raise OutputError(f"Cannot write {path}: {e.strerror or e}", str(path)) from e
    return path


def emit_outputs(
    result: ExperimentResult,
    out_dir: Union[str, Path],
    dump_groups: bool = False,
) -> List[Path]:
    """
    Write the report, layout, traces and optional group plans.

    ``report.json``, ``layout.json``, the trace CSVs and the group dumps
    are byte-identical across reruns of the same config; wall-clock
    timings go to a separate ``timings.json``.

    Raises:
        OutputError: a file or the directory cannot be written
    """
    out = Path(out_dir)
    try:
        out.mkdir(parents=True, exist_ok=True)
    except OSError as e:
        raise OutputError(f"Cannot create output directory {out}: {e.strerror or e}", str(out)) from e

    written = [
        _write(out / "report.json", result.report.to_json()),
        _write(out / "layout.json", dump_layout(result.grid)),
    ]
    for (seed, mode), schedule in sorted(result.schedules.items()):
        path = out / f"trace_{mode}_seed{seed}.csv"
        try:
            schedule.write_csv(path)
        except OSError as e:
            raise OutputError(f"Cannot write {path}: {e.strerror or e}", str(path)) from e
        written.append(path)
    if dump_groups:
        for seed, plan in sorted(result.plans.items()):
            written.append(_write(out / f"groups_seed{seed}.json", json.dumps(plan.to_dict(), indent=2, sort_keys=True) + "\n"))
    written.append(_write(out / "timings.json", json.dumps(result.timings, indent=2, sort_keys=True) + "\n"))
    get_logger().info("Outputs written", directory=str(out), files=len(written))
    return written

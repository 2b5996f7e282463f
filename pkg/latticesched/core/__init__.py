"""
Core components of latticesched.
"""

from .circuit import (
    Gate,
    GateKind,
    LogicalCircuit,
    decompose_circuit,
    decompose_cphase,
    dump_circuit,
    gen_qaoa,
    gen_qft,
    load_circuit,
    parse_circuit,
)
from .cost import CostConfig, PathCost, RotationMode, load_cost_config, merge_cost
from .events import Event, EventKind, EventQueue
from .exceptions import (
    ConfigError,
    DeadlockError,
    LatticeSchedError,
    LayoutError,
    OracleError,
    OutputError,
    RoutingError,
    ScheduleValidationError,
    SynthesisLookupError,
)
from .experiment import (
    Benchmark,
    CompilationReport,
    ExperimentConfig,
    ExperimentResult,
    Mode,
    emit_outputs,
    run_experiment,
)
from .greedy import GreedyResult, GreedyRound, MrvKey, compute_mrv_key, greedy_compile
from .grouping import FanoutGroup, GroupPlan, form_groups, pack_groups, plan_circuit
from .layout import (
    CellRole,
    LayoutGrid,
    LayoutKind,
    MsDensity,
    Orientation,
    build_layout,
    dump_layout,
    layout_from_rows,
    load_layout,
)
from .logging import SchedulerLogger, configure_logging, get_logger
from .oracle import UnitaryMatrix, check_commute, circuit_unitary, replay_schedule, verify_schedule
from .parallel import ParallelResolver, run_parallel
from .rotation import CultivationTracker, Regime, RotationJob, RotationSettings, select_ms_patch
from .routing import Route, SteinerFootprint, bfs_route, steiner_tree
from .schedule import EventSchedule, Interval, Stage, check_schedule, format_cycles
from .scheduler import PipelineScheduler, execute_pipeline
from .slices import SliceSchedule, execute_slices
from .synthesis import RzDecomposition, SynthesisProvider, SynthesisTable, synthesize_rz
from .validation import BaseValidator, validate_model

__all__ = [
    "Gate",
    "GateKind",
    "LogicalCircuit",
    "decompose_circuit",
    "decompose_cphase",
    "dump_circuit",
    "gen_qaoa",
    "gen_qft",
    "load_circuit",
    "parse_circuit",
    "CostConfig",
    "PathCost",
    "RotationMode",
    "load_cost_config",
    "merge_cost",
    "Event",
    "EventKind",
    "EventQueue",
    "ConfigError",
    "DeadlockError",
    "LatticeSchedError",
    "LayoutError",
    "OracleError",
    "OutputError",
    "RoutingError",
    "ScheduleValidationError",
    "SynthesisLookupError",
    "Benchmark",
    "CompilationReport",
    "ExperimentConfig",
    "ExperimentResult",
    "Mode",
    "emit_outputs",
    "run_experiment",
    "GreedyResult",
    "GreedyRound",
    "MrvKey",
    "compute_mrv_key",
    "greedy_compile",
    "FanoutGroup",
    "GroupPlan",
    "form_groups",
    "pack_groups",
    "plan_circuit",
    "CellRole",
    "LayoutGrid",
    "LayoutKind",
    "MsDensity",
    "Orientation",
    "build_layout",
    "dump_layout",
    "layout_from_rows",
    "load_layout",
    "SchedulerLogger",
    "configure_logging",
    "get_logger",
    "UnitaryMatrix",
    "check_commute",
    "circuit_unitary",
    "replay_schedule",
    "verify_schedule",
    "ParallelResolver",
    "run_parallel",
    "CultivationTracker",
    "Regime",
    "RotationJob",
    "RotationSettings",
    "select_ms_patch",
    "Route",
    "SteinerFootprint",
    "bfs_route",
    "steiner_tree",
    "EventSchedule",
    "Interval",
    "Stage",
    "check_schedule",
    "format_cycles",
    "PipelineScheduler",
    "execute_pipeline",
    "SliceSchedule",
    "execute_slices",
    "RzDecomposition",
    "SynthesisProvider",
    "SynthesisTable",
    "synthesize_rz",
    "BaseValidator",
    "validate_model",
]

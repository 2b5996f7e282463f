"""
Command-line interface.

``latticesched compile`` runs an experiment and writes its outputs;
``latticesched show-layout`` prints a generated layout. Exit codes:
0 on success, 1 on configuration or input errors, 2 when a schedule
fails validation.
"""

import argparse
import json
import sys
from dataclasses import fields
from typing import Any, Dict, List, Optional

from . import __version__
from .core.cost import CostConfig
from .core.exceptions import ConfigError, LatticeSchedError
from .core.experiment import Benchmark, ExperimentConfig, Mode, emit_outputs, run_experiment
from .core.layout import LayoutKind, MsDensity, build_layout, dump_layout
from .core.logging import configure_logging
from .core.rotation import Regime
from .core.synthesis import SynthesisProvider


class _Parser(argparse.ArgumentParser):
    def error(self, message: str) -> None:  # type: ignore[override]
        raise ConfigError(f"{self.prog}: {message}")


def _choices(enum) -> List[str]:
    return [m.value for m in enum]


def _add_cost_flags(parser: argparse.ArgumentParser) -> None:
    group = parser.add_argument_group("cost model", "Override single CostConfig fields (clock cycles)")
    for f in fields(CostConfig):
        group.add_argument(f"--{f.name.replace('_', '-')}", dest=f"cost_{f.name}", default=None, metavar="VALUE")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="latticesched", description="Lattice-surgery compilation and scheduling toolkit")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    parser.add_argument("--log-level", default="WARNING", choices=["DEBUG", "INFO", "WARNING", "ERROR", "CRITICAL"])
    parser.add_argument("--log-format", default="text", choices=["text", "json"])
    parser.add_argument("--log-file", default=None)
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    compile_ = sub.add_parser("compile", help="Compile a benchmark and report cycle counts")
    compile_.add_argument("--benchmark", default="qaoa", choices=_choices(Benchmark))
    compile_.add_argument("--qubits", type=int, default=4, dest="n_qubits")
    compile_.add_argument("--circuit", dest="circuit_file", default=None, help="Circuit file for --benchmark file")
    compile_.add_argument("--edge-prob", type=float, default=0.5)
    compile_.add_argument("--layout", default="sparse", choices=_choices(LayoutKind))
    compile_.add_argument("--layout-file", default=None, help="Layout JSON (overrides --layout)")
    compile_.add_argument("--ms-density", default="abundant", choices=_choices(MsDensity))
    compile_.add_argument("--regime", default="eft", choices=_choices(Regime))
    compile_.add_argument("--precision", type=int, default=6)
    compile_.add_argument("--provider", default="model", choices=_choices(SynthesisProvider))
    compile_.add_argument("--synthesis-file", default=None)
    compile_.add_argument("--mode", dest="modes", default=",".join(_choices(Mode)),
                          help="Comma-separated subset of greedy,slice,pipelined")
    compile_.add_argument("--seed", dest="seeds", default="0", help="Seed or comma-separated seeds")
    compile_.add_argument("--out", dest="out_dir", default=None)
    compile_.add_argument("--verify", action="store_true")
    compile_.add_argument("--dump-groups", action="store_true")
    compile_.add_argument("--cost-config", default=None, help="JSON or TOML cost constants")
    compile_.add_argument("--workers", type=int, default=1)
    _add_cost_flags(compile_)

    show = sub.add_parser("show-layout", help="Print a generated layout")
    show.add_argument("--layout", default="sparse", choices=_choices(LayoutKind))
    show.add_argument("--qubits", type=int, default=4, dest="n_qubits")
    show.add_argument("--ms-density", default="abundant", choices=_choices(MsDensity))
    show.add_argument("--json", action="store_true")
    return parser


def _experiment_config(args: argparse.Namespace) -> ExperimentConfig:
    data: Dict[str, Any] = {
        name: getattr(args, name)
        for name in (
            "benchmark", "n_qubits", "circuit_file", "edge_prob", "layout", "layout_file", "ms_density",
            "regime", "precision", "provider", "synthesis_file", "modes", "seeds", "out_dir", "verify",
            "dump_groups", "cost_config", "workers",
        )
    }
    data["cost"] = {
        f.name: getattr(args, f"cost_{f.name}") for f in fields(CostConfig) if getattr(args, f"cost_{f.name}") is not None
    }
    return ExperimentConfig.from_dict(data)


def _compile(args: argparse.Namespace) -> int:
    config = _experiment_config(args)
    result = run_experiment(config)
    if config.out_dir:
        emit_outputs(result, config.out_dir, config.dump_groups)
    report = result.report
    speedups = {(row["seed"], row["mode"]): row["speedup"] for row in report.speedups()}
    for row in report.runs:
        line = f"seed={row.seed} mode={row.mode.value} cycles={row.to_dict()['cycles_exact']}"
        if (row.seed, row.mode.value) in speedups:
            line += f" speedup={speedups[(row.seed, row.mode.value)]}"
        print(line)
    for mode, value in report.geomean_speedups().items():
        print(f"geomean mode={mode} speedup={value}")
    return 0


def _show_layout(args: argparse.Namespace) -> int:
    grid = build_layout(LayoutKind(args.layout), args.n_qubits, MsDensity(args.ms_density))
    sys.stdout.write(dump_layout(grid) if args.json else grid.render() + "\n")
    return 0


def main(argv: Optional[List[str]] = None) -> int:
    """Entry point; returns the process exit code."""
    try:
        args = build_parser().parse_args(argv)
        configure_logging(level=args.log_level, format_type=args.log_format, filepath=args.log_file)
        if args.command == "compile":
            return _compile(args)
        return _show_layout(args)
    except LatticeSchedError as e:
        print(json.dumps(e.to_dict(), sort_keys=True, default=str), file=sys.stderr)
        return e.exit_code


if __name__ == "__main__":
    sys.exit(main())

#!/usr/bin/env python3
"""
latticesched Sweep Script

Compiles QAOA and QFT benchmarks across layouts, sizes and rotation
regimes and prints cycle counts and speedups over the greedy baseline.
Usage: python benchmarks/run_sweep.py [--sizes 8,16] [--out sweep.json]
"""

import argparse
import json
import os
import sys
import time
from typing import Any, Dict, List

sys.path.insert(0, os.path.dirname(os.path.dirname(os.path.abspath(__file__))))

from latticesched.core.experiment import Benchmark, ExperimentConfig, run_experiment  # noqa: E402
from latticesched.core.layout import LayoutKind, MsDensity  # noqa: E402
from latticesched.core.rotation import Regime  # noqa: E402

# Sweep defaults
SIZES = [8, 16, 24]
SEEDS = [0, 1, 2]
EDGE_PROB = 0.5
PRECISION = 6


def parse_args(argv=None) -> argparse.Namespace:
    parser = argparse.ArgumentParser(description="Sweep latticesched benchmarks")
    parser.add_argument("--benchmarks", default="qaoa,qft")
    parser.add_argument("--sizes", default=",".join(str(n) for n in SIZES))
    parser.add_argument("--layouts", default=",".join(k.value for k in LayoutKind))
    parser.add_argument("--regimes", default=",".join(r.value for r in Regime))
    parser.add_argument("--seeds", default=",".join(str(s) for s in SEEDS))
    parser.add_argument("--precision", type=int, default=PRECISION)
    parser.add_argument("--ms-density", default="abundant")
    parser.add_argument("--workers", type=int, default=os.cpu_count() or 1)
    parser.add_argument("--out", default=None, help="Write all reports as one JSON document")
    return parser.parse_args(argv)


def _split(text: str) -> List[str]:
    return [part.strip() for part in text.split(",") if part.strip()]


def run_point(benchmark: str, n: int, layout: str, regime: str, args: argparse.Namespace) -> Dict[str, Any]:
    """Compile one sweep point and return its report plus timing."""
    seeds = [int(s) for s in _split(args.seeds)]
    config = ExperimentConfig(
        benchmark=Benchmark(benchmark),
        n_qubits=n,
        layout=LayoutKind(layout),
        regime=Regime(regime),
        precision=args.precision,
        ms_density=MsDensity(args.ms_density),
        seeds=seeds if benchmark == "qaoa" else seeds[:1],
        edge_prob=EDGE_PROB,
        workers=args.workers,
    )
    start = time.perf_counter()
    report = run_experiment(config).report
    return {
        "benchmark": benchmark,
        "n_qubits": n,
        "layout": layout,
        "regime": regime,
        "seconds": round(time.perf_counter() - start, 3),
        "report": report.to_dict(),
    }


def print_point(point: Dict[str, Any]) -> None:
    geomean = point["report"]["geomean_speedup"]
    runs = point["report"]["runs"]
    cycles = {}
    for run in runs:
        cycles.setdefault(run["mode"], []).append(run["cycles"])
    label = f"{point['benchmark']:>4} n={point['n_qubits']:<3} {point['layout']:<9} {point['regime']:<7}"
    parts = [f"{mode}={sum(values) / len(values):.0f}" for mode, values in sorted(cycles.items())]
    speedups = " ".join(f"x{mode}={value:.2f}" for mode, value in geomean.items() if mode != "greedy")
    print(f"  {label} {' '.join(parts)} | {speedups} ({point['seconds']}s)")


def main(argv=None) -> int:
    """Run the sweep."""
    args = parse_args(argv)
    print("=" * 78)
    print("latticesched Sweep")
    print("=" * 78)
    print(f"Seeds: {args.seeds}, Precision: {args.precision}, MS density: {args.ms_density}")
    print()

    points = []
    for benchmark in _split(args.benchmarks):
        for n in (int(s) for s in _split(args.sizes)):
            for layout in _split(args.layouts):
                for regime in _split(args.regimes):
                    point = run_point(benchmark, n, layout, regime, args)
                    print_point(point)
                    points.append(point)

    if args.out:
        with open(args.out, "w", encoding="utf-8") as handle:
            json.dump(points, handle, indent=2, sort_keys=True)
            handle.write("\n")
        print(f"\nWrote {len(points)} points to {args.out}")
    print("=" * 78)
    return 0


if __name__ == "__main__":
    sys.exit(main())

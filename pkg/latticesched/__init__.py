"""
latticesched - lattice-surgery compilation and scheduling toolkit.

Compiles C-Phase heavy circuits onto a 2D grid of surface-code patches
and reports their execution time in clock cycles.

Key Features:
- Latency-anchored multi-target (fan-out) grouping with Steiner footprints
- Slice-based and pipelined event-driven executors
- Round-based greedy baseline sharing the same cost model
- EFT injection, distilled and cultivated magic-state rotation regimes
- Dense-matrix oracle for semantic checks on small circuits
"""

__version__ = "0.3.0"
__author__ = "latticesched Team"
__description__ = "Lattice-surgery compilation and scheduling toolkit"

from .core import *  # noqa: F401,F403
from .core import __all__ as _core_all

__all__ = ["__version__", *_core_all]

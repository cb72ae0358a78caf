"""Slotted-time simulator and exact Markov oracle for EB/EA task
scheduling on an energy-harvesting IoT device."""

from .core import (
    Counters,
    PolicyKind,
    SimConfig,
    TaskBuffer,
    completion_rate,
    milli_to_str,
    to_milli,
)
from .engine import RunResult, run, run_reference
from .oracle import analyze, oracle_completion_rate
from .sweep import SweepSpec, compare_policies, find_optimum, run_sweep

__all__ = [
    "Counters",
    "PolicyKind",
    "SimConfig",
    "TaskBuffer",
    "completion_rate",
    "milli_to_str",
    "to_milli",
    "RunResult",
    "run",
    "run_reference",
    "analyze",
    "oracle_completion_rate",
    "SweepSpec",
    "compare_policies",
    "find_optimum",
    "run_sweep",
]

__version__ = "0.1.0"

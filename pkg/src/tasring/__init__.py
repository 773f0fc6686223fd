"""Discrete-event simulator for gate-scheduled Ethernet rings.

Models 802.1Qbv time-aware shapers on a ring of six switches under a
dynamic stream workload, with either a central controller or a
fully-distributed in-band protocol deciding admission and resizing the
per-port gate schedules at run time.
"""

from .engine import RunConfig, Simulation, SimulationInvariantError, run_once
from .harness import (
    Scenario,
    ScenarioError,
    run,
    run_scenario,
    rows_to_csv,
    summarize,
    sweep_rows,
    write_csv,
)
from .kernel import KERNEL_BACKEND
from .metrics import MetricsReport

__version__ = "0.1.0"

__all__ = [
    "KERNEL_BACKEND",
    "MetricsReport",
    "RunConfig",
    "Scenario",
    "ScenarioError",
    "Simulation",
    "SimulationInvariantError",
    "__version__",
    "rows_to_csv",
    "run",
    "run_once",
    "run_scenario",
    "summarize",
    "sweep_rows",
    "write_csv",
]

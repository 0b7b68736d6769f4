"""External surface: config parsing, CLI, sweeps, serialization, plots."""

from .config import parse_config, render_config, scenario_to_mapping
from .outputs import write_outputs
from .sweep import SweepSpec, SweepSummary, run_sweep

__all__ = [
    "parse_config",
    "render_config",
    "scenario_to_mapping",
    "write_outputs",
    "SweepSpec",
    "SweepSummary",
    "run_sweep",
]

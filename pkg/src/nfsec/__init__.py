"""Near-field secure downlink: beamfocusing, null-space AN, power split.

Top-level surface: scenario generation, the alternating max-min secrecy
optimizer and its baselines, and the sweep/plot experiment harness.
"""
from ._core import BACKEND
from .algorithm import (MODES, SCHEMES, RunOptions, SolutionReport,
                        run_algorithm1, run_scheme)
from .channel import (ChannelSet, Scenario, ScenarioConfig, build_channels,
                      generate_scenario)
from .experiments import (ExperimentConfig, ResultRow, emit_csv,
                          mean_series, parse_config, run_point, run_sweep)
from .geometry import ArrayGeometry, UePlacement, rayleigh_distance
from .precoding import PrecodingState, null_space_an, power_split
from .rates import (NATS_TO_BITS, min_secrecy_rate, rate_tables,
                    secrecy_rate, secrecy_table)
from .svgplot import emit_beam_pattern, emit_plot

__version__ = "0.1.0"

__all__ = [
    "ArrayGeometry", "BACKEND", "ChannelSet", "ExperimentConfig", "MODES",
    "NATS_TO_BITS", "PrecodingState", "ResultRow", "RunOptions", "SCHEMES",
    "Scenario", "ScenarioConfig", "SolutionReport", "UePlacement",
    "build_channels", "emit_beam_pattern", "emit_csv", "emit_plot",
    "generate_scenario", "mean_series", "min_secrecy_rate", "null_space_an",
    "parse_config", "power_split", "rate_tables", "rayleigh_distance",
    "run_algorithm1", "run_point", "run_scheme", "run_sweep",
    "secrecy_rate", "secrecy_table",
]

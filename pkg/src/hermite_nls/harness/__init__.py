"""Configuration, experiment orchestration and CSV/SVG output."""

from .config import ConfigError, RunConfig, format_config, load_config, parse_config
from .experiments import (
    ErrorRecord,
    Reference,
    RunResult,
    StudyResult,
    benchmark,
    convergence_study,
    default_reference_config,
    fit_slope,
    nodal_l2_error,
    reference_solution,
    run_evolution,
)
from .presets import PRESETS, UnknownPresetError, initial_preset

__all__ = [
    "ConfigError", "RunConfig", "format_config", "load_config", "parse_config",
    "ErrorRecord", "Reference", "RunResult", "StudyResult", "benchmark", "convergence_study",
    "default_reference_config", "fit_slope", "nodal_l2_error", "reference_solution", "run_evolution",
    "PRESETS", "UnknownPresetError", "initial_preset",
]

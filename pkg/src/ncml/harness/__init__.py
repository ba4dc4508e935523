"""Experiment orchestration: scenario configs, data generation, sweeps, CLI."""

from .config import (
    ConfigError,
    ScenarioConfig,
    build_feedback_envs,
    build_forward_modes,
    build_reverse_modes,
    build_scheme_config,
    dump_config,
    load_config,
    parse_config,
    save_config,
    with_updates,
)
from .datagen import generate_observations, generate_training_data
from .sweep import (
    DEFAULT_AXIS_VALUES,
    SummaryRow,
    SweepAxis,
    SweepSpec,
    apply_axis,
    run_point,
    run_sweep,
    train_point_model,
    write_summary_csv,
)

__all__ = [
    "ScenarioConfig",
    "ConfigError",
    "parse_config",
    "load_config",
    "dump_config",
    "save_config",
    "with_updates",
    "build_forward_modes",
    "build_reverse_modes",
    "build_feedback_envs",
    "build_scheme_config",
    "generate_observations",
    "generate_training_data",
    "SweepAxis",
    "SweepSpec",
    "SummaryRow",
    "DEFAULT_AXIS_VALUES",
    "apply_axis",
    "run_point",
    "run_sweep",
    "train_point_model",
    "write_summary_csv",
]

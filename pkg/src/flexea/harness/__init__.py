"""Experiment harness: configuration, seeded runs, statistics and the CLI."""
from .config import ConfigError, ExperimentConfig, load_config
from .experiment import (
    SummaryStats,
    compare,
    emit_plot_data,
    fit_scaling_exponent,
    run_experiment,
    split_seed,
    summarize,
    sweep,
)

__all__ = [
    "ConfigError",
    "ExperimentConfig",
    "SummaryStats",
    "compare",
    "emit_plot_data",
    "fit_scaling_exponent",
    "load_config",
    "run_experiment",
    "split_seed",
    "summarize",
    "sweep",
]

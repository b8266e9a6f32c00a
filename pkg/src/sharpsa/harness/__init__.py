"""Experiment configs, replications, fits and the command line."""

from .config import ConfigError, ExperimentConfig, build_schedule, config_from_dict, load_config
from .fitting import InsufficientData, SlopeFit, TailFit, empirical_ccdf, fit_loglog, fit_tail, is_symmetric, skewness
from .runner import (
    AGGREGATE_HEADER,
    TRAJECTORY_HEADER,
    FailureRateExceeded,
    LinearReport,
    OutputError,
    RunReport,
    TailScaling,
    aggregate,
    run_experiment,
    run_linear_convergence,
    run_replications,
    scaling_verdict,
    stationary_samples,
    tail_rate_scaling,
)

__all__ = [
    "AGGREGATE_HEADER",
    "TRAJECTORY_HEADER",
    "ConfigError",
    "ExperimentConfig",
    "FailureRateExceeded",
    "InsufficientData",
    "LinearReport",
    "OutputError",
    "RunReport",
    "SlopeFit",
    "TailFit",
    "TailScaling",
    "aggregate",
    "build_schedule",
    "config_from_dict",
    "empirical_ccdf",
    "fit_loglog",
    "fit_tail",
    "is_symmetric",
    "load_config",
    "run_experiment",
    "run_linear_convergence",
    "run_replications",
    "scaling_verdict",
    "skewness",
    "stationary_samples",
    "tail_rate_scaling",
]

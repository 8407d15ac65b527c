"""Command-line interface and experiment orchestration."""

from .config import EXPERIMENT_SCHEMA, ConfigError, ExperimentConfig, generate_instance, load_experiment
from .experiment import ExperimentOutcome, run_experiment
from .main import EXIT_BACKEND, EXIT_IO, EXIT_OK, EXIT_REFERENCE_IMPROVED, EXIT_USAGE, build_parser, main

__all__ = [
    "EXIT_BACKEND",
    "EXIT_IO",
    "EXIT_OK",
    "EXIT_REFERENCE_IMPROVED",
    "EXIT_USAGE",
    "EXPERIMENT_SCHEMA",
    "ConfigError",
    "ExperimentConfig",
    "ExperimentOutcome",
    "build_parser",
    "generate_instance",
    "load_experiment",
    "main",
    "run_experiment",
]

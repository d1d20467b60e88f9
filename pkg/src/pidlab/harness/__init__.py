"""Seeded experiment runner: config parsing, experiment registry, CSV reports."""

from .config import ExperimentConfig, load_config
from .experiments import REGISTRY, ResultRow, run_experiment
from .report import emit_report

__all__ = ["ExperimentConfig", "load_config", "REGISTRY", "ResultRow", "run_experiment", "emit_report"]

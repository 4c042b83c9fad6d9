"""Config-driven experiments, canned scenarios and the command line front end."""

from .config import ConfigError, ExperimentConfig, load_config, load_scenario, scenario_names
from .experiment import ExperimentReport, build_initial_data, run_experiment

__all__ = ["ConfigError", "ExperimentConfig", "ExperimentReport", "build_initial_data",
           "load_config", "load_scenario", "run_experiment", "scenario_names"]

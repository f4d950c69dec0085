"""Scenario-driven Monte Carlo harness."""

from .config import (ConfigError, ScenarioConfig, load_scenarios,
                     parse_override, resolved_dict, scenario_from_dict)
from .engine import (build_runtime, derive_sigma2, run_bler_experiment,
                     run_mse_experiment, run_scenario, simulate_block,
                     trial_rng)
from .records import CSV_COLUMNS, MetricRecord, read_csv, write_csv
from .stats import (closest_grid_point, ebn0_at_bler, intervals_separated,
                    wilson_interval)

__all__ = [
    "ConfigError", "ScenarioConfig", "load_scenarios", "parse_override",
    "resolved_dict", "scenario_from_dict", "build_runtime", "derive_sigma2",
    "run_bler_experiment", "run_mse_experiment", "run_scenario",
    "simulate_block", "trial_rng", "CSV_COLUMNS", "MetricRecord", "read_csv",
    "write_csv", "closest_grid_point", "ebn0_at_bler", "intervals_separated",
    "wilson_interval",
]

"""Configuration-driven benchmark harness for sketched least squares."""
from .config import ExperimentConfig, load_config
from .runner import (
    AGGREGATE_COLUMNS,
    RESULT_COLUMNS,
    ResultRow,
    ResultTable,
    check_bounds,
    leverage_tables,
    run_experiment,
)
from .tables import emit_tables, read_results, write_bounds, write_profiles

__all__ = [
    "AGGREGATE_COLUMNS",
    "ExperimentConfig",
    "RESULT_COLUMNS",
    "ResultRow",
    "ResultTable",
    "check_bounds",
    "emit_tables",
    "leverage_tables",
    "load_config",
    "read_results",
    "run_experiment",
    "write_bounds",
    "write_profiles",
]

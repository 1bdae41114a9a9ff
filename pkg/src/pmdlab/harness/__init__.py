"""Sweep planning, execution, result storage, and CSV reporting."""

from .reports import (
    FREQUENCY_TAUS,
    QUANTILES,
    bounds_by_env,
    emit_frequency,
    emit_heatmap,
    emit_min_temp,
    emit_quantiles,
    emit_report,
    emit_robustness,
    min_temp_points,
    missing_runs,
    performance_table,
)
from .serialize import (
    drift_from_dict,
    drift_to_dict,
    env_from_dict,
    env_label,
    env_to_dict,
    reg_from_dict,
    reg_to_dict,
)
from .sweep import (
    ALPHA_GRID,
    DESK_ALPHA_GRID,
    DESK_LAMBDA_GRID,
    DESK_SEEDS,
    DESK_TOTAL_STEPS,
    LAMBDA_GRID,
    ResultStore,
    RunManifest,
    RunTask,
    SweepSpec,
    build_agent_config,
    config_id,
    default_env_suite,
    default_grids,
    execute_run,
    plan_runs,
    run_sweep,
    schedule_for,
    stable_seed,
)

__all__ = [
    "ALPHA_GRID",
    "LAMBDA_GRID",
    "DESK_ALPHA_GRID",
    "DESK_LAMBDA_GRID",
    "DESK_SEEDS",
    "DESK_TOTAL_STEPS",
    "FREQUENCY_TAUS",
    "QUANTILES",
    "ResultStore",
    "RunManifest",
    "RunTask",
    "SweepSpec",
    "bounds_by_env",
    "build_agent_config",
    "config_id",
    "default_env_suite",
    "default_grids",
    "drift_from_dict",
    "drift_to_dict",
    "emit_frequency",
    "emit_heatmap",
    "emit_min_temp",
    "emit_quantiles",
    "emit_report",
    "emit_robustness",
    "env_from_dict",
    "env_label",
    "env_to_dict",
    "execute_run",
    "min_temp_points",
    "missing_runs",
    "performance_table",
    "plan_runs",
    "reg_from_dict",
    "reg_to_dict",
    "run_sweep",
    "schedule_for",
    "stable_seed",
]

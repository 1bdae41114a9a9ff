"""CSV report generation over completed sweep stores.

All reports read the ndjson record store, normalize returns against each
environment's bounds, and write small CSV tables: the per-cell heatmap,
the robustness table, frequency curves, top-quantile summaries, and the
minimal-required-temperature regression data. Floats print with six
significant digits.
"""

from __future__ import annotations

import csv
from pathlib import Path

import numpy as np

from ..environments import bounds
from ..errors import IncompleteDataError
from ..metrics import (
    ALPHA_CAP_FOR_LAMBDA_SCAN,
    LAMBDA_CAP_FOR_ALPHA_SCAN,
    MIN_TEMP_THRESHOLD,
    PerformanceTable,
    RunRecord,
    aggregate,
    linear_fit,
    min_required_temperature,
    normalize_return,
    perf_frequency,
    robustness,
    top_quantile_stats,
)
from .serialize import env_label
from .sweep import ResultStore, SweepSpec, config_id

FREQUENCY_TAUS = [round(i / 100.0, 2) for i in range(101)]
QUANTILES = (0.01, 0.10)


def _fmt(x) -> str:
    if x is None:
        return ""
    return f"{x:.6g}"


def bounds_by_env(spec: SweepSpec) -> dict:
    return {env_label(e): bounds(e) for e in spec.env_suite}


def missing_runs(spec: SweepSpec, store: ResultStore) -> list:
    """Run keys the spec expects but the store does not hold."""
    missing = []
    for alpha in spec.alpha_grid:
        for lam in spec.lambda_grid:
            cid = config_id(alpha, lam)
            for env in spec.env_suite:
                name = env_label(env)
                for seed in range(spec.seeds_per_config):
                    if not store.has(cid, name, seed):
                        missing.append(f"{cid}.{name}.s{seed}")
    return missing


def _require_complete(spec: SweepSpec, store: ResultStore) -> None:
    missing = missing_runs(spec, store)
    if missing:
        shown = ", ".join(missing[:8])
        more = f" (+{len(missing) - 8} more)" if len(missing) > 8 else ""
        raise IncompleteDataError(
            f"sweep {spec.name!r} is missing {len(missing)} runs: {shown}{more}"
        )


def _records_by_cell(store: ResultStore) -> dict:
    by_cell: dict = {}
    for rec in store.records():
        key = (rec["alpha"], rec["lambda"])
        by_cell.setdefault(key, []).append(rec)
    return by_cell


def performance_table(store: ResultStore, spec: SweepSpec,
                      env_filter: str | None = None) -> PerformanceTable:
    """Aggregate d(A) per grid cell; requires a complete store."""
    _require_complete(spec, store)
    all_bounds = bounds_by_env(spec)
    if env_filter is not None:
        all_bounds = {env_filter: all_bounds[env_filter]}
    by_cell = _records_by_cell(store)
    cells = {}
    per_env = {}
    for alpha in spec.alpha_grid:
        for lam in spec.lambda_grid:
            recs = [
                RunRecord(r["config_id"], r["env"], r["seed"], tuple(r["eval_returns"]))
                for r in by_cell.get((alpha, lam), [])
                if env_filter is None or r["env"] == env_filter
            ]
            cells[(alpha, lam)] = aggregate(recs, all_bounds)
            per_env[(alpha, lam)] = {
                name: aggregate([r for r in recs if r.env == name], {name: b})
                for name, b in all_bounds.items()
            }
    return PerformanceTable(cells=cells, per_env=per_env)


def emit_heatmap(store: ResultStore, spec: SweepSpec, out_path) -> Path:
    """Per-cell normalized-return summary; incomplete cells flagged, not dropped."""
    out_path = Path(out_path)
    all_bounds = bounds_by_env(spec)
    by_cell = _records_by_cell(store)
    expected = len(spec.env_suite) * spec.seeds_per_config
    with open(out_path, "w", newline="", encoding="utf-8") as f:
        writer = csv.writer(f)
        writer.writerow(["alpha", "lambda", "mean_norm_return",
                         "std_norm_return", "n_runs", "incomplete"])
        for alpha in sorted(spec.alpha_grid):
            for lam in sorted(spec.lambda_grid):
                recs = by_cell.get((alpha, lam), [])
                values = []
                for r in recs:
                    b = all_bounds[r["env"]]
                    values.extend(normalize_return(x, b) for x in r["eval_returns"])
                mean = _fmt(float(np.mean(values))) if values else ""
                std = _fmt(float(np.std(values))) if values else ""
                writer.writerow([
                    _fmt(alpha), _fmt(lam), mean, std,
                    len(recs), int(len(recs) < expected),
                ])
    return out_path


def emit_robustness(stores_specs: list, out_path) -> Path:
    """Table of Rbst at thresholds 0.90 and 0.95, best first."""
    out_path = Path(out_path)
    rows = []
    for store, spec in stores_specs:
        table = performance_table(store, spec)
        rows.append([
            spec.name,
            spec.regularizer.label(),
            spec.drift.label(),
            robustness(0.90, table),
            robustness(0.95, table),
        ])
    rows.sort(key=lambda r: -r[3])
    with open(out_path, "w", newline="", encoding="utf-8") as f:
        writer = csv.writer(f)
        writer.writerow(["label", "h", "D", "rbst_090", "rbst_095"])
        for label, h, drift, r90, r95 in rows:
            writer.writerow([label, h, drift, _fmt(r90), _fmt(r95)])
    return out_path


def emit_frequency(stores_specs: list, out_path) -> Path:
    """Performance-frequency curves sampled at tau = 0.00 .. 1.00."""
    out_path = Path(out_path)
    with open(out_path, "w", newline="", encoding="utf-8") as f:
        writer = csv.writer(f)
        writer.writerow(["label", "tau", "frequency"])
        for store, spec in stores_specs:
            table = performance_table(store, spec)
            for tau in FREQUENCY_TAUS:
                writer.writerow([spec.name, _fmt(tau),
                                 _fmt(perf_frequency(tau, table))])
    return out_path


def emit_quantiles(stores_specs: list, out_path) -> Path:
    """Top-1% and top-10% cell statistics over positive-temperature cells."""
    out_path = Path(out_path)
    with open(out_path, "w", newline="", encoding="utf-8") as f:
        writer = csv.writer(f)
        writer.writerow(["label", "h", "D", "quantile", "mean", "std"])
        for store, spec in stores_specs:
            table = performance_table(store, spec)
            for q in QUANTILES:
                mean, std = top_quantile_stats(q, table, restrict_positive=True)
                writer.writerow([spec.name, spec.regularizer.label(),
                                 spec.drift.label(), _fmt(q), _fmt(mean), _fmt(std)])
    return out_path


def min_temp_points(store: ResultStore, spec: SweepSpec,
                    threshold: float = MIN_TEMP_THRESHOLD) -> list:
    """(max_return, min_alpha, min_lambda) per environment, by max return."""
    points = []
    for env in spec.env_suite:
        name = env_label(env)
        table = performance_table(store, spec, env_filter=name)
        min_alpha = min_required_temperature(
            "alpha", threshold, table, LAMBDA_CAP_FOR_ALPHA_SCAN)
        min_lambda = min_required_temperature(
            "lambda", threshold, table, ALPHA_CAP_FOR_LAMBDA_SCAN)
        points.append((bounds(env).r_max, min_alpha, min_lambda))
    points.sort(key=lambda p: p[0])
    return points


def emit_min_temp(store: ResultStore, spec: SweepSpec, out_dir,
                  threshold: float = MIN_TEMP_THRESHOLD) -> tuple:
    """Two CSVs with identical point columns; each carries one axis's fit.

    min_temp_alpha.csv regresses min_alpha on max_return and
    min_temp_lambda.csv regresses min_lambda; rows where a minimum does not
    exist stay in the table with an empty cell but leave the fit.
    """
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    points = min_temp_points(store, spec, threshold)
    paths = []
    for axis, fname in ((1, "min_temp_alpha.csv"), (2, "min_temp_lambda.csv")):
        fit_points = [(p[0], p[axis]) for p in points if p[axis] is not None]
        fit = linear_fit(fit_points)
        path = out_dir / fname
        with open(path, "w", newline="", encoding="utf-8") as f:
            writer = csv.writer(f)
            writer.writerow(["max_return", "min_alpha", "min_lambda",
                             "slope", "intercept", "ci_low", "ci_high"])
            for max_return, min_alpha, min_lambda in points:
                low, high = fit.confidence_band(max_return)
                writer.writerow([
                    _fmt(max_return), _fmt(min_alpha), _fmt(min_lambda),
                    _fmt(fit.slope), _fmt(fit.intercept),
                    _fmt(float(low)), _fmt(float(high)),
                ])
        paths.append(path)
    return tuple(paths)


def emit_report(stores_specs: list, out_dir,
                threshold: float = MIN_TEMP_THRESHOLD) -> dict:
    """The full report bundle; min-temp files only for multi-scale suites."""
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    paths = {
        "robustness": emit_robustness(stores_specs, out_dir / "robustness.csv"),
        "frequency": emit_frequency(stores_specs, out_dir / "frequency.csv"),
        "quantiles": emit_quantiles(stores_specs, out_dir / "quantiles.csv"),
    }
    for store, spec in stores_specs:
        max_returns = {bounds(e).r_max for e in spec.env_suite}
        if len(max_returns) >= 3:
            alpha_path, lambda_path = emit_min_temp(store, spec, out_dir, threshold)
            paths["min_temp_alpha"] = alpha_path
            paths["min_temp_lambda"] = lambda_path
    return paths

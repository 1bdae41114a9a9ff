"""Return normalization, aggregation, and robustness summaries.

A sweep produces one aggregated normalized return d in [0, 1] per
temperature pair; the functions here turn those tables into frequency
curves, the area-based robustness score, top-quantile summaries, and
minimal-required-temperature points with an OLS trend line.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy import stats

from .environments import ReturnBounds
from .errors import ConfigurationError, IncompleteDataError

# Success threshold for "learning happened" when scanning one temperature
# axis; 0.75 is the looser published alternative, selectable by flag.
MIN_TEMP_THRESHOLD = 0.85
MIN_TEMP_THRESHOLD_ALT = 0.75
# When scanning one axis, the other temperature must stay below its cap so
# the scanned regularizer is the one doing the work.
LAMBDA_CAP_FOR_ALPHA_SCAN = 1e-3
ALPHA_CAP_FOR_LAMBDA_SCAN = 0.002


@dataclass(frozen=True)
class RunRecord:
    config_id: str
    env: str
    seed: int
    eval_returns: tuple

    def __post_init__(self):
        if len(self.eval_returns) == 0:
            raise ConfigurationError("a run record needs at least one evaluation")


@dataclass
class PerformanceTable:
    """Aggregated normalized return per (alpha, lambda) grid cell."""

    cells: dict
    per_env: dict = field(default_factory=dict)

    def __post_init__(self):
        for key, d in self.cells.items():
            if not (0.0 <= d <= 1.0):
                raise ConfigurationError(f"cell {key} outside [0, 1]: {d}")

    def __len__(self) -> int:
        return len(self.cells)

    def sorted_items(self) -> list:
        return sorted(self.cells.items())

    def values(self) -> np.ndarray:
        return np.array([d for _, d in self.sorted_items()])


def normalize_return(raw: float, bounds: ReturnBounds) -> float:
    """Linear rescale of a raw return onto [0, 1], clamped at both ends."""
    span = bounds.r_max - bounds.r_min
    if span <= 0.0:
        raise ConfigurationError("return bounds have no width")
    return float(np.clip((raw - bounds.r_min) / span, 0.0, 1.0))


def aggregate(records: list, bounds_by_env: dict) -> float:
    """Mean normalized return across environments, seeds, and evaluations.

    Every environment in ``bounds_by_env`` must be covered by at least one
    record; the caller keeps record counts per environment equal, so the
    grand mean weights environments equally.
    """
    if not records:
        raise IncompleteDataError("no run records to aggregate")
    covered = {r.env for r in records}
    missing = sorted(set(bounds_by_env) - covered)
    if missing:
        raise IncompleteDataError(f"no records for environments: {', '.join(missing)}")
    values = []
    for record in records:
        if record.env not in bounds_by_env:
            raise ConfigurationError(f"no bounds for environment {record.env!r}")
        b = bounds_by_env[record.env]
        values.extend(normalize_return(r, b) for r in record.eval_returns)
    return float(np.mean(values))


def perf_frequency(tau: float, table: PerformanceTable) -> float:
    """Share of grid cells reaching normalized return at least tau."""
    if len(table) == 0:
        raise ConfigurationError("empty performance table")
    values = table.values()
    return float(np.count_nonzero(values >= tau) / len(values))


def robustness(threshold: float, table: PerformanceTable) -> float:
    """Normalized area under the frequency curve above the threshold.

    Closed form of (1/(1-T)) * integral_T^1 freq(tau) dtau: each cell
    contributes its clamped excess over T.
    """
    if not 0.0 <= threshold < 1.0:
        raise ConfigurationError("threshold must lie in [0, 1)")
    if len(table) == 0:
        raise ConfigurationError("empty performance table")
    values = np.minimum(table.values(), 1.0)
    excess = np.maximum(0.0, values - threshold)
    return float(excess.sum() / ((1.0 - threshold) * len(values)))


def top_quantile_stats(q: float, table: PerformanceTable,
                       restrict_positive: bool) -> tuple:
    """Mean and population std of the best ceil(q * count) cells.

    With ``restrict_positive`` only cells where both temperatures are
    strictly positive participate. Ties at the cutoff resolve by
    (alpha, lambda) lexicographic order.
    """
    if not 0.0 < q <= 1.0:
        raise ConfigurationError("quantile must lie in (0, 1]")
    items = [
        (key, d) for key, d in table.sorted_items()
        if not restrict_positive or (key[0] > 0.0 and key[1] > 0.0)
    ]
    if not items:
        raise IncompleteDataError("no cells with both temperatures positive")
    items.sort(key=lambda kv: (-kv[1], kv[0]))
    k = math.ceil(q * len(items))
    top = np.array([d for _, d in items[:k]])
    return float(top.mean()), float(top.std())


def min_required_temperature(axis: str, threshold: float, table: PerformanceTable,
                             other_axis_cap: float) -> float | None:
    """Smallest axis temperature whose cell reaches the threshold.

    Only cells where the other axis stays at or below its cap count;
    returns None when no cell qualifies.
    """
    if axis not in ("alpha", "lambda"):
        raise ConfigurationError(f"axis must be 'alpha' or 'lambda', not {axis!r}")
    best = None
    for (a, lam), d in table.cells.items():
        own, other = (a, lam) if axis == "alpha" else (lam, a)
        if other <= other_axis_cap and d >= threshold:
            best = own if best is None else min(best, own)
    return best


@dataclass(frozen=True)
class LinearFit:
    slope: float
    intercept: float
    residual_std: float
    x_mean: float
    sxx: float
    n: int

    def predict(self, x):
        return self.slope * np.asarray(x) + self.intercept

    def confidence_band(self, x, level: float = 0.95) -> tuple:
        """Pointwise band for the mean response at x."""
        x = np.asarray(x, dtype=np.float64)
        t = stats.t.ppf(0.5 + level / 2.0, self.n - 2)
        half = t * self.residual_std * np.sqrt(1.0 / self.n + (x - self.x_mean) ** 2 / self.sxx)
        center = self.predict(x)
        return center - half, center + half


def linear_fit(points: list) -> LinearFit:
    """Ordinary least squares over (x, y) pairs; needs 3+ points."""
    if len(points) < 3:
        raise ConfigurationError("linear_fit needs at least 3 points")
    x = np.array([p[0] for p in points], dtype=np.float64)
    y = np.array([p[1] for p in points], dtype=np.float64)
    x_mean = float(x.mean())
    sxx = float(np.sum((x - x_mean) ** 2))
    if sxx <= 0.0:
        raise np.linalg.LinAlgError("x values are degenerate; slope undefined")
    slope = float(np.sum((x - x_mean) * (y - y.mean())) / sxx)
    intercept = float(y.mean() - slope * x_mean)
    residuals = y - (slope * x + intercept)
    residual_std = float(np.sqrt(np.sum(residuals**2) / (len(x) - 2)))
    return LinearFit(slope=slope, intercept=intercept, residual_std=residual_std,
                     x_mean=x_mean, sxx=sxx, n=len(x))

"""Convex regularizers on the probability simplex and their Bregman divergences.

All operations are pure and broadcast over leading axes: a distribution
argument may be a single vector ``(n,)`` or a stack ``(..., n)``; the simplex
axis is always the last one.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ConfigurationError, InvalidDistributionError

# Entries are clamped to [PROB_FLOOR, 1] before log / p**(m-1) evaluation;
# softmax policies only reach 0 through underflow, but that is enough.
PROB_FLOOR = 1e-8

SIMPLEX_ATOL = 1e-9

NEG_SHANNON = "neg_shannon"
NEG_TSALLIS = "neg_tsallis"
SQ_L2 = "sq_l2"
MAX = "max"

REVERSE_KL = "reverse_kl"
FORWARD_KL = "forward_kl"
BREGMAN = "bregman"


@dataclass(frozen=True)
class RegularizerSpec:
    """Choice of convex regularizer h on the simplex.

    ``m`` is the Tsallis exponent (m > 0, m != 1); ``p`` the norm exponent
    (p >= 1, default 2 so ``sq_l2`` is the squared Euclidean norm).
    """

    kind: str
    m: float | None = None
    p: float = 2.0

    def __post_init__(self):
        if self.kind not in (NEG_SHANNON, NEG_TSALLIS, SQ_L2, MAX):
            raise ConfigurationError(f"unknown regularizer kind: {self.kind!r}")
        if self.kind == NEG_TSALLIS:
            if self.m is None or self.m <= 0 or self.m == 1.0:
                raise ConfigurationError(
                    f"Tsallis exponent must satisfy m > 0, m != 1; got {self.m!r}"
                )
        if self.kind == SQ_L2 and self.p < 1:
            raise ConfigurationError(f"norm exponent must satisfy p >= 1; got {self.p!r}")

    @classmethod
    def neg_shannon(cls) -> "RegularizerSpec":
        return cls(NEG_SHANNON)

    @classmethod
    def neg_tsallis(cls, m: float) -> "RegularizerSpec":
        return cls(NEG_TSALLIS, m=m)

    @classmethod
    def sq_l2(cls, p: float = 2.0) -> "RegularizerSpec":
        return cls(SQ_L2, p=p)

    @classmethod
    def max_(cls) -> "RegularizerSpec":
        return cls(MAX)

    def label(self) -> str:
        if self.kind == NEG_TSALLIS:
            return f"neg_tsallis[{self.m:g}]"
        if self.kind == SQ_L2 and self.p != 2.0:
            return f"lp[{self.p:g}]"
        return self.kind


@dataclass(frozen=True)
class DriftSpec:
    """Choice of drift penalty D(pi_new; pi_old)."""

    kind: str
    potential: RegularizerSpec | None = None

    def __post_init__(self):
        if self.kind not in (REVERSE_KL, FORWARD_KL, BREGMAN):
            raise ConfigurationError(f"unknown drift kind: {self.kind!r}")
        if self.kind == BREGMAN and self.potential is None:
            raise ConfigurationError("bregman drift requires a potential RegularizerSpec")

    @classmethod
    def reverse_kl(cls) -> "DriftSpec":
        return cls(REVERSE_KL)

    @classmethod
    def forward_kl(cls) -> "DriftSpec":
        return cls(FORWARD_KL)

    @classmethod
    def bregman_of(cls, potential: RegularizerSpec) -> "DriftSpec":
        return cls(BREGMAN, potential=potential)

    def label(self) -> str:
        if self.kind == BREGMAN:
            return f"bregman({self.potential.label()})"
        return self.kind


def validate_distribution(p, name: str = "p") -> np.ndarray:
    """Check simplex membership and return the input as a float64 array."""
    arr = np.asarray(p, dtype=np.float64)
    if arr.shape == () or arr.shape[-1] < 2:
        raise InvalidDistributionError(f"{name} must have at least 2 entries")
    if not np.all(np.isfinite(arr)):
        raise InvalidDistributionError(f"{name} has non-finite entries")
    if np.any(arr < 0.0) or np.any(arr > 1.0):
        raise InvalidDistributionError(f"{name} has entries outside [0, 1]")
    sums = arr.sum(axis=-1)
    if np.any(np.abs(sums - 1.0) > SIMPLEX_ATOL):
        worst = float(np.max(np.abs(sums - 1.0)))
        raise InvalidDistributionError(f"{name} entries sum to 1 +/- {worst:.3e}")
    return arr


def _floored(p: np.ndarray) -> np.ndarray:
    return np.clip(p, PROB_FLOOR, 1.0)


def h_value(spec: RegularizerSpec, p) -> np.ndarray | float:
    """Evaluate h(p); scalar for a single distribution, array for a stack."""
    arr = validate_distribution(p)
    out = _h_value_raw(spec, arr)
    return float(out) if out.ndim == 0 else out


def _h_value_raw(spec: RegularizerSpec, arr: np.ndarray) -> np.ndarray:
    if spec.kind == NEG_SHANNON:
        q = _floored(arr)
        return np.sum(q * np.log(q), axis=-1)
    if spec.kind == NEG_TSALLIS:
        q = _floored(arr) if spec.m < 1 else arr
        return np.sum(q**spec.m - q, axis=-1) / (spec.m - 1.0)
    if spec.kind == SQ_L2:
        return np.sum(arr**spec.p, axis=-1)
    if spec.kind == MAX:
        return np.max(arr, axis=-1)
    raise ConfigurationError(f"unknown regularizer kind: {spec.kind!r}")


def h_subgradient(spec: RegularizerSpec, p) -> np.ndarray:
    """A valid subgradient of h at p, same shape as p.

    For ``max`` the tie is broken to the lowest maximizing index so the
    result is deterministic.
    """
    arr = validate_distribution(p)
    return _h_subgradient_raw(spec, arr)


def _h_subgradient_raw(spec: RegularizerSpec, arr: np.ndarray) -> np.ndarray:
    if spec.kind == NEG_SHANNON:
        q = _floored(arr)
        return np.log(q) + 1.0
    if spec.kind == NEG_TSALLIS:
        q = _floored(arr) if spec.m < 1 else arr
        return (spec.m * q ** (spec.m - 1.0) - 1.0) / (spec.m - 1.0)
    if spec.kind == SQ_L2:
        return spec.p * arr ** (spec.p - 1.0)
    if spec.kind == MAX:
        grad = np.zeros_like(arr)
        j = np.argmax(arr, axis=-1)  # first maximizer = lowest index
        np.put_along_axis(grad, j[..., None], 1.0, axis=-1)
        return grad
    raise ConfigurationError(f"unknown regularizer kind: {spec.kind!r}")


def bregman(potential: RegularizerSpec, p, q) -> np.ndarray | float:
    """Bregman divergence B_h(p, q) >= 0 induced by the potential h.

    Uses the closed forms where available (Tsallis, Lp, max) and the generic
    first-order remainder otherwise; the two agree to 1e-9.
    """
    p_arr = validate_distribution(p, "p")
    q_arr = validate_distribution(q, "q")
    out = _bregman_raw(potential, p_arr, q_arr)
    return float(out) if out.ndim == 0 else out


def _bregman_raw(potential: RegularizerSpec, p: np.ndarray, q: np.ndarray) -> np.ndarray:
    if potential.kind == NEG_TSALLIS:
        m = potential.m
        if m < 1:
            p, q = _floored(p), _floored(q)
        return np.sum(p**m - m * p * q ** (m - 1.0) - (1.0 - m) * q**m, axis=-1) / (m - 1.0)
    if potential.kind == SQ_L2:
        e = potential.p
        return np.sum(p**e - q**e - e * p * q ** (e - 1.0) + e * q**e, axis=-1)
    if potential.kind == MAX:
        j = np.argmax(q, axis=-1)
        diff = np.take_along_axis(p - q, j[..., None], axis=-1)[..., 0]
        return np.max(p, axis=-1) - np.max(q, axis=-1) - diff
    return np.asarray(bregman_generic(potential, p, q))


def bregman_generic(potential: RegularizerSpec, p, q) -> np.ndarray | float:
    """B_h(p, q) = h(p) - h(q) - <grad h(q), p - q>, from h and its subgradient.

    The same floor is applied to p and q as inside h itself, keeping the
    three terms evaluated at consistent points (guarantees nonnegativity).
    """
    p_arr = np.asarray(p, dtype=np.float64)
    q_arr = np.asarray(q, dtype=np.float64)
    if potential.kind == NEG_SHANNON or (potential.kind == NEG_TSALLIS and potential.m < 1):
        p_arr, q_arr = _floored(p_arr), _floored(q_arr)
    grad_q = _h_subgradient_raw(potential, q_arr)
    out = (
        _h_value_raw(potential, p_arr)
        - _h_value_raw(potential, q_arr)
        - np.sum(grad_q * (p_arr - q_arr), axis=-1)
    )
    return float(out) if out.ndim == 0 else out


def drift_value(spec: DriftSpec, p_new, p_old) -> np.ndarray | float:
    """Drift penalty D(p_new; p_old); p_old is the frozen previous policy."""
    p_arr = validate_distribution(p_new, "p_new")
    q_arr = validate_distribution(p_old, "p_old")
    if spec.kind == REVERSE_KL:
        out = _kl_raw(p_arr, q_arr)
    elif spec.kind == FORWARD_KL:
        out = _kl_raw(q_arr, p_arr)
    else:
        out = _bregman_raw(spec.potential, p_arr, q_arr)
    return float(out) if out.ndim == 0 else out


def _kl_raw(p: np.ndarray, q: np.ndarray) -> np.ndarray:
    p_f, q_f = _floored(p), _floored(q)
    return np.sum(p_f * (np.log(p_f) - np.log(q_f)), axis=-1)


def h_bound(spec: RegularizerSpec, n: int) -> float:
    """Upper bound on |h(p)| over the n-simplex."""
    if n < 2:
        raise ConfigurationError(f"need n >= 2 actions, got {n}")
    if spec.kind == NEG_SHANNON:
        return float(np.log(n))
    if spec.kind == NEG_TSALLIS:
        m = spec.m
        if m > 1:
            return 1.0 / (m - 1.0)
        y_star = m ** (1.0 / (1.0 - m))  # maximizer of |y - y^m| on [0, 1]
        return n / (1.0 - m) * abs(y_star - y_star**m)
    if spec.kind == SQ_L2:
        return 1.0
    if spec.kind == MAX:
        return 1.0
    raise ConfigurationError(f"no bound available for kind {spec.kind!r}")

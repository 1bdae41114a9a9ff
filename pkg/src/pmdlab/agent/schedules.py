"""Temperature schedules: constant, linear decay to zero, and learned.

A learned schedule applies to the entropy-side temperature only; it keeps
a log-parameterized scalar updated by gradient steps against a target
h-level, which is itself a weight w (constant or annealed) times a
reference h-bar-0. The reference defaults to minus the regularizer's
bound, the most-regularized value h can reach.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

from ..errors import ConfigurationError

CONSTANT = "constant"
LINEAR = "linear"
LEARNED = "learned"


@dataclass(frozen=True)
class TemperatureSchedule:
    kind: str
    value: float = 0.0
    total_steps: int = 0
    target_weight: Optional["TemperatureSchedule"] = None
    h_bar0: float | None = None
    initial: float = 1.0

    def __post_init__(self):
        if self.kind not in (CONSTANT, LINEAR, LEARNED):
            raise ConfigurationError(f"unknown schedule kind: {self.kind!r}")
        if self.kind in (CONSTANT, LINEAR) and self.value < 0.0:
            raise ConfigurationError("temperature must be non-negative")
        if self.kind == LINEAR and self.total_steps < 1:
            raise ConfigurationError("linear schedule needs positive total_steps")
        if self.kind == LEARNED:
            if self.target_weight is None:
                raise ConfigurationError("learned schedule needs a target_weight")
            if self.target_weight.kind == LEARNED:
                raise ConfigurationError("target_weight cannot itself be learned")
            if self.initial <= 0.0:
                raise ConfigurationError("learned schedule needs a positive start")

    @staticmethod
    def constant(value: float) -> "TemperatureSchedule":
        return TemperatureSchedule(kind=CONSTANT, value=value)

    @staticmethod
    def linear(start: float, total_steps: int) -> "TemperatureSchedule":
        return TemperatureSchedule(kind=LINEAR, value=start, total_steps=total_steps)

    @staticmethod
    def learned(target_weight: "TemperatureSchedule",
                h_bar0: float | None = None,
                initial: float = 1.0) -> "TemperatureSchedule":
        return TemperatureSchedule(kind=LEARNED, target_weight=target_weight,
                                   h_bar0=h_bar0, initial=initial)

    def is_learned(self) -> bool:
        return self.kind == LEARNED

    def value_at(self, step: int) -> float:
        """Scheduled temperature after ``step`` environment steps."""
        if self.kind == CONSTANT:
            return self.value
        if self.kind == LINEAR:
            frac = min(step, self.total_steps) / self.total_steps
            return self.value * (1.0 - frac)
        raise ConfigurationError("a learned temperature has no scheduled value")

    def to_dict(self) -> dict:
        d: dict = {"kind": self.kind}
        if self.kind in (CONSTANT, LINEAR):
            d["value"] = self.value
        if self.kind == LINEAR:
            d["total_steps"] = self.total_steps
        if self.kind == LEARNED:
            d["target_weight"] = self.target_weight.to_dict()
            if self.h_bar0 is not None:
                d["h_bar0"] = self.h_bar0
            d["initial"] = self.initial
        return d

    @staticmethod
    def from_dict(d: dict) -> "TemperatureSchedule":
        kind = d.get("kind")
        if kind == CONSTANT:
            return TemperatureSchedule.constant(float(d["value"]))
        if kind == LINEAR:
            return TemperatureSchedule.linear(float(d["value"]), int(d["total_steps"]))
        if kind == LEARNED:
            return TemperatureSchedule.learned(
                TemperatureSchedule.from_dict(d["target_weight"]),
                h_bar0=d.get("h_bar0"),
                initial=float(d.get("initial", 1.0)),
            )
        raise ConfigurationError(f"unknown schedule kind: {kind!r}")

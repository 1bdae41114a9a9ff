"""JSON codecs for regularizer, drift, schedule, and environment configs."""

from __future__ import annotations

from ..environments import EnvConfig
from ..errors import ConfigurationError
from ..regularizers import (
    BREGMAN,
    DriftSpec,
    RegularizerSpec,
    NEG_TSALLIS,
    SQ_L2,
)


def reg_to_dict(spec: RegularizerSpec) -> dict:
    d: dict = {"kind": spec.kind}
    if spec.kind == NEG_TSALLIS:
        d["m"] = spec.m
    if spec.kind == SQ_L2:
        d["p"] = spec.p
    return d


def reg_from_dict(d: dict) -> RegularizerSpec:
    try:
        kind = d["kind"]
    except (TypeError, KeyError) as exc:
        raise ConfigurationError(f"regularizer needs a 'kind' field: {d!r}") from exc
    if kind == NEG_TSALLIS:
        if "m" not in d:
            raise ConfigurationError("neg_tsallis needs an 'm' field")
        return RegularizerSpec.neg_tsallis(float(d["m"]))
    if kind == SQ_L2:
        return RegularizerSpec.sq_l2(float(d.get("p", 2.0)))
    return RegularizerSpec(kind=kind)


def drift_to_dict(spec: DriftSpec) -> dict:
    d: dict = {"kind": spec.kind}
    if spec.kind == BREGMAN:
        d["potential"] = reg_to_dict(spec.potential)
    return d


def drift_from_dict(d: dict) -> DriftSpec:
    try:
        kind = d["kind"]
    except (TypeError, KeyError) as exc:
        raise ConfigurationError(f"drift needs a 'kind' field: {d!r}") from exc
    if kind == BREGMAN:
        if "potential" not in d:
            raise ConfigurationError("bregman drift needs a 'potential' field")
        return DriftSpec.bregman_of(reg_from_dict(d["potential"]))
    return DriftSpec(kind=kind)


def env_to_dict(config: EnvConfig) -> dict:
    d: dict = {"kind": config.kind}
    if config.reward_scale != 1.0:
        d["reward_scale"] = config.reward_scale
    if config.kind == "catch" and (config.catch_rows, config.catch_cols) != (10, 5):
        d["catch_rows"] = config.catch_rows
        d["catch_cols"] = config.catch_cols
    if config.kind == "deepsea" and config.deepsea_size != 8:
        d["deepsea_size"] = config.deepsea_size
    if config.max_episode_steps is not None:
        d["max_episode_steps"] = config.max_episode_steps
    return d


def env_from_dict(d: dict) -> EnvConfig:
    try:
        kind = d["kind"]
    except (TypeError, KeyError) as exc:
        raise ConfigurationError(f"environment needs a 'kind' field: {d!r}") from exc
    return EnvConfig(
        kind=kind,
        reward_scale=float(d.get("reward_scale", 1.0)),
        catch_rows=int(d.get("catch_rows", 10)),
        catch_cols=int(d.get("catch_cols", 5)),
        deepsea_size=int(d.get("deepsea_size", 8)),
        max_episode_steps=d.get("max_episode_steps"),
    )


def env_label(config: EnvConfig) -> str:
    """Stable short name for an environment variant, used as a record key."""
    parts = [config.kind]
    if config.reward_scale != 1.0:
        parts.append(f"x{config.reward_scale:.10g}")
    if config.kind == "catch" and (config.catch_rows, config.catch_cols) != (10, 5):
        parts.append(f"{config.catch_rows}r{config.catch_cols}c")
    if config.kind == "deepsea" and config.deepsea_size != 8:
        parts.append(f"{config.deepsea_size}s")
    if config.max_episode_steps is not None:
        parts.append(f"cap{config.max_episode_steps}")
    return "-".join(parts)

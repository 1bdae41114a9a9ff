"""Four small discrete-action tasks behind one functional interface.

CartPole and Acrobot follow the standard classic-control dynamics
(Euler and RK4 book-variant integration respectively); Catch is the
falling-ball grid task; DeepSea is the deterministic exploration chain
with a single treasure in the bottom-right cell. Every reward is
multiplied by ``reward_scale``, which rescales the whole return range.

State is explicit: ``reset``/``step`` take and return ``EnvState`` values
instead of mutating a hidden object.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from ..errors import ConfigurationError, EnvUsageError
from .kernels import BACKEND, acrobot_step, cartpole_step

CARTPOLE = "cartpole"
ACROBOT = "acrobot"
CATCH = "catch"
DEEPSEA = "deepsea"
ENV_KINDS = (CARTPOLE, ACROBOT, CATCH, DEEPSEA)

_DEFAULT_MAX_STEPS = {CARTPOLE: 500, ACROBOT: 500}
# Acrobot's practical best return, used as the normalization ceiling.
ACROBOT_BEST_RETURN = -75.0


@dataclass(frozen=True)
class EnvConfig:
    kind: str
    reward_scale: float = 1.0
    catch_rows: int = 10
    catch_cols: int = 5
    deepsea_size: int = 8
    max_episode_steps: int | None = None

    def __post_init__(self):
        if self.kind not in ENV_KINDS:
            raise ConfigurationError(f"unknown environment kind: {self.kind!r}")
        if not (self.reward_scale > 0.0 and math.isfinite(self.reward_scale)):
            raise ConfigurationError("reward_scale must be positive and finite")
        if self.catch_rows < 3 or self.catch_cols < 2:
            raise ConfigurationError("catch board must be at least 3x2")
        if self.deepsea_size < 1:
            raise ConfigurationError("deepsea_size must be at least 1")
        if self.max_episode_steps is not None and self.max_episode_steps < 1:
            raise ConfigurationError("max_episode_steps must be positive")

    def episode_limit(self) -> int:
        if self.max_episode_steps is not None:
            return self.max_episode_steps
        if self.kind == CATCH:
            return self.catch_rows
        if self.kind == DEEPSEA:
            return 2 * self.deepsea_size
        return _DEFAULT_MAX_STEPS[self.kind]


@dataclass
class EnvState:
    data: np.ndarray
    step_count: int
    done: bool
    rng: np.random.Generator


@dataclass(frozen=True)
class StepResult:
    observation: np.ndarray
    reward: float
    done: bool


@dataclass(frozen=True)
class ReturnBounds:
    r_max: float
    r_min: float

    def __post_init__(self):
        if not self.r_max > self.r_min:
            raise ConfigurationError("r_max must exceed r_min")


def action_count(config: EnvConfig) -> int:
    return {CARTPOLE: 2, ACROBOT: 3, CATCH: 3, DEEPSEA: 2}[config.kind]


def obs_dim(config: EnvConfig) -> int:
    if config.kind == CARTPOLE:
        return 4
    if config.kind == ACROBOT:
        return 6
    if config.kind == CATCH:
        return config.catch_rows * config.catch_cols
    return config.deepsea_size * config.deepsea_size


def bounds(config: EnvConfig) -> ReturnBounds:
    c = config.reward_scale
    cap = config.episode_limit()
    if config.kind == CARTPOLE:
        return ReturnBounds(r_max=cap * c, r_min=0.0)
    if config.kind == ACROBOT:
        return ReturnBounds(r_max=ACROBOT_BEST_RETURN * c, r_min=-cap * c)
    if config.kind == CATCH:
        return ReturnBounds(r_max=c, r_min=-c)
    return ReturnBounds(r_max=c, r_min=0.0)


def observation(config: EnvConfig, state: EnvState) -> np.ndarray:
    d = state.data
    if config.kind == CARTPOLE:
        return d.copy()
    if config.kind == ACROBOT:
        return np.array([
            math.cos(d[0]), math.sin(d[0]),
            math.cos(d[1]), math.sin(d[1]),
            d[2], d[3],
        ])
    if config.kind == CATCH:
        board = np.zeros((config.catch_rows, config.catch_cols))
        board[int(d[0]), int(d[1])] = 1.0
        board[config.catch_rows - 1, int(d[2])] = 1.0
        return board.reshape(-1)
    board = np.zeros(config.deepsea_size * config.deepsea_size)
    row, col = int(d[0]), int(d[1])
    if row < config.deepsea_size:
        board[row * config.deepsea_size + col] = 1.0
    return board


def reset(config: EnvConfig, seed) -> tuple[EnvState, np.ndarray]:
    """Start a fresh episode with a new generator built from ``seed``."""
    return _reset_with(config, np.random.default_rng(seed))


def reset_from(config: EnvConfig, state: EnvState) -> tuple[EnvState, np.ndarray]:
    """Start the next episode, continuing the previous state's rng stream."""
    return _reset_with(config, state.rng)


def _reset_with(config: EnvConfig, rng: np.random.Generator):
    if config.kind == CARTPOLE:
        data = rng.uniform(-0.05, 0.05, size=4)
    elif config.kind == ACROBOT:
        data = rng.uniform(-0.1, 0.1, size=4)
    elif config.kind == CATCH:
        ball_col = rng.integers(config.catch_cols)
        data = np.array([0.0, float(ball_col), float(config.catch_cols // 2)])
    else:
        data = np.zeros(2)
    state = EnvState(data=data, step_count=0, done=False, rng=rng)
    return state, observation(config, state)


def step(config: EnvConfig, state: EnvState, action: int) -> tuple[EnvState, StepResult]:
    if state.done:
        raise EnvUsageError("cannot step a finished episode; reset first")
    n = action_count(config)
    action = int(action)
    if not 0 <= action < n:
        raise EnvUsageError(f"action {action} out of range [0, {n})")

    c = config.reward_scale
    d = state.data
    if config.kind == CARTPOLE:
        x, xd, th, thd, failed = cartpole_step(d[0], d[1], d[2], d[3], action)
        data = np.array([x, xd, th, thd])
        reward = 1.0 * c
        done = bool(failed)
    elif config.kind == ACROBOT:
        t1, t2, w1, w2, goal = acrobot_step(d[0], d[1], d[2], d[3], action)
        data = np.array([t1, t2, w1, w2])
        reward = 0.0 if goal else -1.0 * c
        done = bool(goal)
    elif config.kind == CATCH:
        paddle = int(np.clip(int(d[2]) + (action - 1), 0, config.catch_cols - 1))
        ball_row = int(d[0]) + 1
        data = np.array([float(ball_row), d[1], float(paddle)])
        done = ball_row == config.catch_rows - 1
        reward = (c if int(d[1]) == paddle else -c) if done else 0.0
    else:
        size = config.deepsea_size
        col = int(np.clip(int(d[1]) + (1 if action == 1 else -1), 0, size - 1))
        row = int(d[0]) + 1
        data = np.array([float(row), float(col)])
        done = row == size
        reward = c if done and col == size - 1 else 0.0

    step_count = state.step_count + 1
    if step_count >= config.episode_limit():
        done = True
    new_state = EnvState(data=data, step_count=step_count, done=done, rng=state.rng)
    return new_state, StepResult(
        observation=observation(config, new_state), reward=reward, done=done
    )


def rescaled_cartpole_suite() -> list[EnvConfig]:
    """CartPole at eleven reward scales, max return 1000 down to 5."""
    scales = [2.0, 1.5, 1.0, 0.8, 2.0 / 3.0, 0.6, 0.4, 1.0 / 3.5, 0.2, 0.1, 0.01]
    return [EnvConfig(kind=CARTPOLE, reward_scale=s) for s in scales]


__all__ = [
    "BACKEND",
    "CARTPOLE",
    "ACROBOT",
    "CATCH",
    "DEEPSEA",
    "ENV_KINDS",
    "ACROBOT_BEST_RETURN",
    "EnvConfig",
    "EnvState",
    "StepResult",
    "ReturnBounds",
    "action_count",
    "obs_dim",
    "bounds",
    "observation",
    "reset",
    "reset_from",
    "step",
    "rescaled_cartpole_suite",
]

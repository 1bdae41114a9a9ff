"""Replay, schedules, losses, and the training loop."""

from .losses import (
    action_onehot,
    actor_loss_tape,
    alpha_loss_tape,
    critic_loss_tape,
    critic_targets,
    drift_tape,
    h_tape,
)
from .mdpo import AgentConfig, IterationLog, MDPOAgent, evaluate, sample_actions
from .replay import ReplayBuffer
from .schedules import CONSTANT, LEARNED, LINEAR, TemperatureSchedule

__all__ = [
    "AgentConfig",
    "IterationLog",
    "MDPOAgent",
    "evaluate",
    "sample_actions",
    "ReplayBuffer",
    "TemperatureSchedule",
    "CONSTANT",
    "LINEAR",
    "LEARNED",
    "action_onehot",
    "actor_loss_tape",
    "alpha_loss_tape",
    "critic_loss_tape",
    "critic_targets",
    "drift_tape",
    "h_tape",
]

"""Off-policy mirror-descent policy optimization.

One training iteration: collect a fixed number of environment steps into
the replay buffer, sample a single minibatch, snapshot the current policy
as the drift anchor, take the configured number of clipped optimizer
steps on the actor loss, optionally one step on the learned temperature,
then the critic epochs against bootstrapped targets, and finally a Polyak
update of the target critics. Temperatures advance on the environment-step
clock.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from ..environments import (
    EnvConfig,
    action_count,
    obs_dim,
    reset,
    reset_from,
    step,
)
from ..errors import ConfigurationError
from ..neural.nets import (
    CRITIC_HEAD_GAIN,
    POLICY_HEAD_GAIN,
    MlpParams,
    forward_np,
    init_mlp,
    policy_probs_np,
)
from ..neural.autodiff import value_and_grad
from ..neural.optim import adam_init, adam_step, polyak_update
from ..regularizers import DriftSpec, RegularizerSpec, h_bound, h_value
from .losses import (
    action_onehot,
    actor_loss_tape,
    alpha_loss_tape,
    critic_loss_tape,
    critic_targets,
)
from .replay import ReplayBuffer
from .schedules import TemperatureSchedule


@dataclass(frozen=True)
class AgentConfig:
    regularizer: RegularizerSpec
    drift: DriftSpec
    alpha_schedule: TemperatureSchedule
    lambda_schedule: TemperatureSchedule
    use_regularized_q: bool = True
    gamma: float = 0.99
    env_count: int = 16
    steps_per_update: int = 256
    batch_size: int = 512
    critic_epochs: int = 1
    actor_epochs: int = 2
    tau: float = 0.95
    total_env_steps: int = 1_000_000
    learning_rate: float = 0.0025
    max_grad_norm: float = 1.0
    buffer_capacity: int = 100_000
    hidden_sizes: tuple = (64, 64)

    def __post_init__(self):
        if not 0.0 <= self.gamma < 1.0:
            raise ConfigurationError("gamma must be in [0, 1)")
        for name in ("env_count", "steps_per_update", "batch_size",
                     "critic_epochs", "actor_epochs", "total_env_steps",
                     "buffer_capacity"):
            if getattr(self, name) < 1:
                raise ConfigurationError(f"{name} must be positive")
        if not 0.0 <= self.tau <= 1.0:
            raise ConfigurationError("tau must be in [0, 1]")
        if self.learning_rate <= 0.0 or self.max_grad_norm <= 0.0:
            raise ConfigurationError("learning_rate and max_grad_norm must be positive")
        if self.lambda_schedule.is_learned():
            raise ConfigurationError("a learned schedule applies to alpha only")


@dataclass(frozen=True)
class IterationLog:
    iteration: int
    env_steps: int
    mean_return: float
    alpha: float
    lam: float
    actor_loss: float
    critic_loss: float
    alpha_loss: float | None


def sample_actions(probs: np.ndarray, rng: np.random.Generator) -> np.ndarray:
    """Inverse-CDF draw of one action per row of a probability matrix."""
    u = rng.random(probs.shape[0])
    cdf = np.cumsum(probs, axis=-1)
    return np.minimum((cdf < u[:, None]).sum(axis=-1), probs.shape[-1] - 1)


def _split(leaves):
    return list(leaves[0::2]), list(leaves[1::2])


class MDPOAgent:
    def __init__(self, config: AgentConfig, env_config: EnvConfig, seed):
        self.config = config
        self.env_config = env_config
        self.n_actions = action_count(env_config)
        self.obs_size = obs_dim(env_config)

        entropy = seed if isinstance(seed, np.random.SeedSequence) else np.random.SeedSequence(seed)
        kids = entropy.spawn(5 + config.env_count)
        sizes = [self.obs_size, *config.hidden_sizes, self.n_actions]
        self.policy = init_mlp(sizes, np.random.default_rng(kids[0]), POLICY_HEAD_GAIN)
        self.q1 = init_mlp(sizes, np.random.default_rng(kids[1]), CRITIC_HEAD_GAIN)
        self.q2 = init_mlp(sizes, np.random.default_rng(kids[2]), CRITIC_HEAD_GAIN)
        self.target_q1 = self.q1.copy()
        self.target_q2 = self.q2.copy()
        self.batch_rng = np.random.default_rng(kids[3])
        self.action_rng = np.random.default_rng(kids[4])

        self.envs = []
        self.env_obs = []
        for i in range(config.env_count):
            state, obs = reset(env_config, kids[5 + i])
            self.envs.append(state)
            self.env_obs.append(obs)

        self.actor_opt = adam_init(self.policy.arrays(), config.learning_rate)
        self.q1_opt = adam_init(self.q1.arrays(), config.learning_rate)
        self.q2_opt = adam_init(self.q2.arrays(), config.learning_rate)
        self.learned_alpha = config.alpha_schedule.is_learned()
        if self.learned_alpha:
            sched = config.alpha_schedule
            self.log_alpha = math.log(sched.initial)
            self.h_bar0 = sched.h_bar0 if sched.h_bar0 is not None else -h_bound(
                config.regularizer, self.n_actions
            )
            self.alpha_opt = adam_init([np.asarray(self.log_alpha)], config.learning_rate)

        self.buffer = ReplayBuffer(config.buffer_capacity, self.obs_size)
        self.env_steps = 0
        self.iteration = 0
        self._ep_returns = np.zeros(config.env_count)

    def current_alpha(self) -> float:
        if self.learned_alpha:
            return math.exp(self.log_alpha)
        return self.config.alpha_schedule.value_at(self.env_steps)

    def current_lambda(self) -> float:
        return self.config.lambda_schedule.value_at(self.env_steps)

    def collect(self, n_steps: int) -> list[float]:
        """Advance all environments in fixed order; returns finished-episode returns."""
        cfg = self.config
        if n_steps % cfg.env_count != 0:
            raise ConfigurationError("collect steps must divide evenly across environments")
        finished = []
        for _ in range(n_steps // cfg.env_count):
            obs_mat = np.stack(self.env_obs)
            probs = policy_probs_np(self.policy, obs_mat)
            actions = sample_actions(probs, self.action_rng)
            for i in range(cfg.env_count):
                new_state, res = step(self.env_config, self.envs[i], int(actions[i]))
                self.buffer.add(self.env_obs[i], int(actions[i]), res.reward,
                                res.observation, res.done)
                self._ep_returns[i] += res.reward
                if res.done:
                    finished.append(float(self._ep_returns[i]))
                    self._ep_returns[i] = 0.0
                    self.envs[i], self.env_obs[i] = reset_from(self.env_config, new_state)
                else:
                    self.envs[i] = new_state
                    self.env_obs[i] = res.observation
            self.env_steps += cfg.env_count
        return finished

    def train_iteration(self) -> IterationLog:
        cfg = self.config
        step0 = self.env_steps
        alpha_k = self.current_alpha()
        lam_k = self.current_lambda()

        finished = self.collect(cfg.steps_per_update)
        batch = self.buffer.sample(cfg.batch_size, self.batch_rng)
        obs = batch["obs"]

        old_probs = policy_probs_np(self.policy, obs)
        q_hat = np.minimum(forward_np(self.q1, obs), forward_np(self.q2, obs))

        actor_loss = math.nan
        for _ in range(cfg.actor_epochs):
            def actor_fn(leaves):
                w, b = _split(leaves)
                return actor_loss_tape(w, b, obs, q_hat, cfg.regularizer,
                                       alpha_k, cfg.drift, lam_k, old_probs)

            actor_loss, grads = value_and_grad(actor_fn, self.policy.arrays())
            self.actor_opt, arrays = adam_step(self.actor_opt, self.policy.arrays(),
                                               grads, cfg.max_grad_norm)
            self.policy = MlpParams.from_arrays(arrays)

        alpha_loss = None
        if self.learned_alpha:
            h_snap = np.asarray(h_value(cfg.regularizer, old_probs))
            w_k = cfg.alpha_schedule.target_weight.value_at(step0)
            h_bar = w_k * self.h_bar0
            alpha_loss, grads = value_and_grad(
                lambda leaves: alpha_loss_tape(leaves[0], h_snap, h_bar),
                [np.asarray(self.log_alpha)],
            )
            self.alpha_opt, arrays = adam_step(self.alpha_opt, [np.asarray(self.log_alpha)],
                                               grads, cfg.max_grad_norm)
            self.log_alpha = float(arrays[0])

        targets = critic_targets(
            cfg.gamma, cfg.regularizer, alpha_k, cfg.use_regularized_q,
            self.policy, self.target_q1, self.target_q2,
            batch["rewards"], batch["next_obs"], batch["dones"],
        )
        onehot = action_onehot(batch["actions"], self.n_actions)
        critic_loss = math.nan
        for _ in range(cfg.critic_epochs):
            loss_total = 0.0
            for which in ("q1", "q2"):
                net = self.q1 if which == "q1" else self.q2
                opt = self.q1_opt if which == "q1" else self.q2_opt

                def critic_fn(leaves):
                    w, b = _split(leaves)
                    return critic_loss_tape(w, b, obs, onehot, targets)

                loss_i, grads = value_and_grad(critic_fn, net.arrays())
                opt, arrays = adam_step(opt, net.arrays(), grads, cfg.max_grad_norm)
                loss_total += loss_i
                if which == "q1":
                    self.q1_opt, self.q1 = opt, MlpParams.from_arrays(arrays)
                else:
                    self.q2_opt, self.q2 = opt, MlpParams.from_arrays(arrays)
            critic_loss = loss_total

        self.target_q1 = polyak_update(self.target_q1, self.q1, cfg.tau)
        self.target_q2 = polyak_update(self.target_q2, self.q2, cfg.tau)

        self.iteration += 1
        return IterationLog(
            iteration=self.iteration,
            env_steps=self.env_steps,
            mean_return=float(np.mean(finished)) if finished else math.nan,
            alpha=alpha_k,
            lam=lam_k,
            actor_loss=actor_loss,
            critic_loss=critic_loss,
            alpha_loss=alpha_loss,
        )

    def train(self) -> list[IterationLog]:
        n_iterations = self.config.total_env_steps // self.config.steps_per_update
        return [self.train_iteration() for _ in range(n_iterations)]


def evaluate(policy: MlpParams, env_config: EnvConfig, m_episodes: int, seed) -> list[float]:
    """Roll out m full episodes with stochastic action choice; raw returns."""
    entropy = seed if isinstance(seed, np.random.SeedSequence) else np.random.SeedSequence(seed)
    env_seed, action_seed = entropy.spawn(2)
    rng = np.random.default_rng(action_seed)
    state, obs = reset(env_config, env_seed)
    returns = []
    for _ in range(m_episodes):
        total = 0.0
        done = False
        while not done:
            probs = policy_probs_np(policy, obs[None, :])
            a = int(sample_actions(probs, rng)[0])
            state, res = step(env_config, state, a)
            total += res.reward
            obs = res.observation
            done = res.done
        returns.append(total)
        state, obs = reset_from(env_config, state)
    return returns

"""Fixed-capacity ring buffer of transitions with uniform sampling."""

from __future__ import annotations

import numpy as np

from ..errors import ConfigurationError


class ReplayBuffer:
    """Preallocated (s, a, r, s', done) storage; oldest entries overwritten."""

    def __init__(self, capacity: int, obs_dim: int):
        if capacity < 1:
            raise ConfigurationError("replay capacity must be positive")
        self.capacity = int(capacity)
        self.obs = np.zeros((self.capacity, obs_dim))
        self.actions = np.zeros(self.capacity, dtype=np.int64)
        self.rewards = np.zeros(self.capacity)
        self.next_obs = np.zeros((self.capacity, obs_dim))
        self.dones = np.zeros(self.capacity)
        self._next = 0
        self._size = 0

    def __len__(self) -> int:
        return self._size

    def add(self, obs, action, reward, next_obs, done) -> None:
        i = self._next
        self.obs[i] = obs
        self.actions[i] = action
        self.rewards[i] = reward
        self.next_obs[i] = next_obs
        self.dones[i] = 1.0 if done else 0.0
        self._next = (i + 1) % self.capacity
        self._size = min(self._size + 1, self.capacity)

    def add_batch(self, obs, actions, rewards, next_obs, dones) -> None:
        for i in range(len(actions)):
            self.add(obs[i], actions[i], rewards[i], next_obs[i], dones[i])

    def sample(self, batch_size: int, rng: np.random.Generator) -> dict:
        """Uniform sample with replacement; requires a non-empty buffer."""
        if self._size == 0:
            raise ConfigurationError("cannot sample from an empty buffer")
        idx = rng.integers(self._size, size=batch_size)
        return {
            "obs": self.obs[idx],
            "actions": self.actions[idx],
            "rewards": self.rewards[idx],
            "next_obs": self.next_obs[idx],
            "dones": self.dones[idx],
        }

"""Small tanh MLPs with orthogonal init and JSON checkpoints.

Two forward paths share the same parameters: ``forward_np`` is a plain
numpy pass used for data collection, evaluation, and any term that is
held constant during a gradient step; ``forward_tape`` builds the
autodiff graph for loss minimization.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np

from ..errors import ConfigurationError
from .autodiff import Tensor, softmax

HIDDEN_GAIN = float(np.sqrt(2.0))
POLICY_HEAD_GAIN = 0.01
CRITIC_HEAD_GAIN = 0.0


@dataclass
class MlpParams:
    """Per-layer weight matrices (in, out) and bias vectors (out,)."""

    weights: list[np.ndarray]
    biases: list[np.ndarray]

    def layer_sizes(self) -> list[int]:
        return [self.weights[0].shape[0]] + [w.shape[1] for w in self.weights]

    def arrays(self) -> list[np.ndarray]:
        """Flatten to [W0, b0, W1, b1, ...] for the optimizer."""
        out = []
        for w, b in zip(self.weights, self.biases):
            out.append(w)
            out.append(b)
        return out

    @staticmethod
    def from_arrays(arrays: list[np.ndarray]) -> "MlpParams":
        return MlpParams(weights=list(arrays[0::2]), biases=list(arrays[1::2]))

    def copy(self) -> "MlpParams":
        return MlpParams(
            weights=[w.copy() for w in self.weights],
            biases=[b.copy() for b in self.biases],
        )

    def n_params(self) -> int:
        return sum(a.size for a in self.arrays())


def _orthogonal(rng: np.random.Generator, rows: int, cols: int, gain: float) -> np.ndarray:
    if gain == 0.0:
        return np.zeros((rows, cols))
    a = rng.standard_normal((max(rows, cols), min(rows, cols)))
    q, r = np.linalg.qr(a)
    q = q * np.sign(np.diag(r))
    if rows < cols:
        q = q.T
    return np.ascontiguousarray(gain * q[:rows, :cols])


def init_mlp(
    layer_sizes: list[int],
    rng: np.random.Generator,
    head_gain: float,
) -> MlpParams:
    """Orthogonal weights (gain sqrt(2) hidden, head_gain output), zero biases."""
    if len(layer_sizes) < 2:
        raise ConfigurationError("an MLP needs at least input and output sizes")
    weights = []
    biases = []
    last = len(layer_sizes) - 2
    for i, (n_in, n_out) in enumerate(zip(layer_sizes[:-1], layer_sizes[1:])):
        gain = head_gain if i == last else HIDDEN_GAIN
        weights.append(_orthogonal(rng, n_in, n_out, gain))
        biases.append(np.zeros(n_out))
    return MlpParams(weights=weights, biases=biases)


def forward_np(params: MlpParams, x: np.ndarray) -> np.ndarray:
    """Plain numpy forward pass; tanh hidden layers, linear head."""
    h = np.asarray(x, dtype=np.float64)
    last = len(params.weights) - 1
    for i, (w, b) in enumerate(zip(params.weights, params.biases)):
        h = h @ w + b
        if i != last:
            h = np.tanh(h)
    return h


def forward_tape(weights: list[Tensor], biases: list[Tensor], x: np.ndarray) -> Tensor:
    """Autodiff forward pass over tensor-valued parameters."""
    h = Tensor(np.asarray(x, dtype=np.float64))
    last = len(weights) - 1
    for i, (w, b) in enumerate(zip(weights, biases)):
        h = h @ w + b
        if i != last:
            h = h.tanh()
    return h


def policy_probs_np(params: MlpParams, obs: np.ndarray) -> np.ndarray:
    """Action distribution(s) from observation(s): softmax over logits."""
    logits = forward_np(params, obs)
    z = logits - logits.max(axis=-1, keepdims=True)
    e = np.exp(z)
    return e / e.sum(axis=-1, keepdims=True)


def policy_probs_tape(weights: list[Tensor], biases: list[Tensor], x: np.ndarray) -> Tensor:
    return softmax(forward_tape(weights, biases, x), axis=-1)


def save_mlp(params: MlpParams) -> dict:
    return {
        "layer_sizes": params.layer_sizes(),
        "weights": [w.tolist() for w in params.weights],
        "biases": [b.tolist() for b in params.biases],
    }


def load_mlp(blob: dict) -> MlpParams:
    try:
        weights = [np.asarray(w, dtype=np.float64) for w in blob["weights"]]
        biases = [np.asarray(b, dtype=np.float64) for b in blob["biases"]]
    except (KeyError, TypeError, ValueError) as exc:
        raise ConfigurationError(f"malformed network blob: {exc}") from exc
    params = MlpParams(weights=weights, biases=biases)
    if "layer_sizes" in blob and list(blob["layer_sizes"]) != params.layer_sizes():
        raise ConfigurationError("layer_sizes does not match stored arrays")
    return params


def save_checkpoint(path: str, payload: dict) -> None:
    with open(path, "w", encoding="utf-8") as f:
        json.dump(payload, f)


def load_checkpoint(path: str) -> dict:
    with open(path, encoding="utf-8") as f:
        return json.load(f)

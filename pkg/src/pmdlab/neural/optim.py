"""Adam with global gradient-norm clipping, plus Polyak averaging."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..errors import NumericalError
from .nets import MlpParams


@dataclass
class AdamState:
    lr: float
    beta1: float
    beta2: float
    eps: float
    step: int
    m: list[np.ndarray]
    v: list[np.ndarray]


def adam_init(arrays: list[np.ndarray], lr: float, beta1: float = 0.9,
              beta2: float = 0.999, eps: float = 1e-8) -> AdamState:
    return AdamState(
        lr=lr, beta1=beta1, beta2=beta2, eps=eps, step=0,
        m=[np.zeros_like(a) for a in arrays],
        v=[np.zeros_like(a) for a in arrays],
    )


def global_norm(arrays: list[np.ndarray]) -> float:
    return float(np.sqrt(sum(float(np.sum(a * a)) for a in arrays)))


def clip_by_global_norm(grads: list[np.ndarray], max_norm: float) -> list[np.ndarray]:
    """Rescale so the joint L2 norm is at most max_norm."""
    norm = global_norm(grads)
    if norm <= max_norm or norm == 0.0:
        return grads
    scale = max_norm / norm
    return [g * scale for g in grads]


def adam_step(state: AdamState, arrays: list[np.ndarray],
              grads: list[np.ndarray], max_grad_norm: float | None = None
              ) -> tuple[AdamState, list[np.ndarray]]:
    """One Adam update; returns the advanced state and new parameter arrays."""
    if not np.isfinite(global_norm(grads)):
        raise NumericalError("non-finite gradient in optimizer step")
    if max_grad_norm is not None:
        grads = clip_by_global_norm(grads, max_grad_norm)
    t = state.step + 1
    b1, b2 = state.beta1, state.beta2
    new_m = []
    new_v = []
    new_arrays = []
    bias1 = 1.0 - b1**t
    bias2 = 1.0 - b2**t
    for a, g, m, v in zip(arrays, grads, state.m, state.v):
        m2 = b1 * m + (1.0 - b1) * g
        v2 = b2 * v + (1.0 - b2) * g * g
        m_hat = m2 / bias1
        v_hat = v2 / bias2
        new_arrays.append(a - state.lr * m_hat / (np.sqrt(v_hat) + state.eps))
        new_m.append(m2)
        new_v.append(v2)
    return (
        AdamState(lr=state.lr, beta1=b1, beta2=b2, eps=state.eps,
                  step=t, m=new_m, v=new_v),
        new_arrays,
    )


def polyak_update(target: MlpParams, online: MlpParams, tau: float) -> MlpParams:
    """target <- tau * target + (1 - tau) * online, elementwise."""
    return MlpParams(
        weights=[tau * tw + (1.0 - tau) * ow
                 for tw, ow in zip(target.weights, online.weights)],
        biases=[tau * tb + (1.0 - tau) * ob
                for tb, ob in zip(target.biases, online.biases)],
    )

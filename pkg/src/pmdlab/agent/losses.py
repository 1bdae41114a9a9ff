"""Training losses on the autodiff tape, plus the numpy critic targets.

Policy-side h and drift terms are differentiated; everything else enters
as gradient-detached constants. The tape evaluations apply the same
probability floor as the numpy regularizer functions, so values agree
between the two paths.
"""

from __future__ import annotations

import numpy as np

from ..neural.autodiff import Tensor
from ..neural.nets import MlpParams, forward_np, forward_tape, policy_probs_np, policy_probs_tape
from ..regularizers import (
    FORWARD_KL,
    MAX,
    NEG_SHANNON,
    NEG_TSALLIS,
    PROB_FLOOR,
    REVERSE_KL,
    SQ_L2,
    DriftSpec,
    RegularizerSpec,
    h_subgradient,
    h_value,
)
from ..errors import ConfigurationError


def _needs_floor(spec: RegularizerSpec) -> bool:
    return spec.kind == NEG_SHANNON or (spec.kind == NEG_TSALLIS and spec.m < 1)


def h_tape(spec: RegularizerSpec, probs: Tensor) -> Tensor:
    """h applied along the last axis of a tape-valued distribution stack."""
    if spec.kind == NEG_SHANNON:
        pc = probs.clip(PROB_FLOOR, 1.0)
        return (pc * pc.log()).sum(axis=-1)
    if spec.kind == NEG_TSALLIS:
        pc = probs.clip(PROB_FLOOR, 1.0) if spec.m < 1 else probs
        return (pc**spec.m - pc).sum(axis=-1) * (1.0 / (spec.m - 1.0))
    if spec.kind == SQ_L2:
        return (probs**spec.p).sum(axis=-1)
    if spec.kind == MAX:
        return probs.max(axis=-1)
    raise ConfigurationError(f"unknown regularizer kind: {spec.kind!r}")


def drift_tape(spec: DriftSpec, probs: Tensor, old_probs: np.ndarray) -> Tensor:
    """Drift penalty against the frozen snapshot distribution, on the tape."""
    old = np.asarray(old_probs, dtype=np.float64)
    if spec.kind == REVERSE_KL:
        pc = probs.clip(PROB_FLOOR, 1.0)
        qc = np.clip(old, PROB_FLOOR, 1.0)
        return (pc * (pc.log() - Tensor(np.log(qc)))).sum(axis=-1)
    if spec.kind == FORWARD_KL:
        pc = probs.clip(PROB_FLOOR, 1.0)
        qc = np.clip(old, PROB_FLOOR, 1.0)
        return (Tensor(qc) * (Tensor(np.log(qc)) - pc.log())).sum(axis=-1)
    pot = spec.potential
    grad_q = h_subgradient(pot, old)
    h_q = np.asarray(h_value(pot, old))
    if _needs_floor(pot):
        p_inner = probs.clip(PROB_FLOOR, 1.0)
        q_inner = np.clip(old, PROB_FLOOR, 1.0)
    else:
        p_inner = probs
        q_inner = old
    const = np.sum(grad_q * q_inner, axis=-1) - h_q
    return h_tape(pot, probs) - (p_inner * Tensor(grad_q)).sum(axis=-1) + Tensor(const)


def actor_loss_tape(
    weights: list[Tensor],
    biases: list[Tensor],
    obs: np.ndarray,
    q_hat: np.ndarray,
    regularizer: RegularizerSpec,
    alpha: float,
    drift: DriftSpec,
    lam: float,
    old_probs: np.ndarray,
) -> Tensor:
    """Mean over states of E_pi[-Q-hat] + alpha*h(pi) + lambda*D(pi; pi_old)."""
    probs = policy_probs_tape(weights, biases, obs)
    per_state = (probs * Tensor(-np.asarray(q_hat))).sum(axis=-1)
    if alpha != 0.0:
        per_state = per_state + alpha * h_tape(regularizer, probs)
    if lam != 0.0:
        per_state = per_state + lam * drift_tape(drift, probs, old_probs)
    return per_state.mean()


def critic_targets(
    gamma: float,
    regularizer: RegularizerSpec,
    alpha: float,
    use_regularized_q: bool,
    policy: MlpParams,
    target_q1: MlpParams,
    target_q2: MlpParams,
    rewards: np.ndarray,
    next_obs: np.ndarray,
    dones: np.ndarray,
) -> np.ndarray:
    """Bootstrapped targets r + (1-d)*(gamma*E_pi'[min Q_target] - alpha*h).

    The whole bootstrap, including the -alpha*h(pi(s')) correction, is
    zeroed on terminal transitions; the correction is dropped entirely when
    use_regularized_q is false, so the critic then tracks unregularized Q.
    """
    probs = policy_probs_np(policy, next_obs)
    q_min = np.minimum(forward_np(target_q1, next_obs), forward_np(target_q2, next_obs))
    boot = gamma * np.sum(probs * q_min, axis=-1)
    if use_regularized_q:
        boot = boot - alpha * h_value(regularizer, probs)
    return rewards + (1.0 - dones) * boot


def critic_loss_tape(
    weights: list[Tensor],
    biases: list[Tensor],
    obs: np.ndarray,
    action_onehot: np.ndarray,
    targets: np.ndarray,
) -> Tensor:
    """Mean squared Bellman residual of one critic at the taken actions."""
    onehot = Tensor(action_onehot)
    y = Tensor(targets)
    d = (forward_tape(weights, biases, obs) * onehot).sum(axis=-1) - y
    return (d * d).mean()


def alpha_loss_tape(log_alpha: Tensor, h_snapshot: np.ndarray, h_bar: float) -> Tensor:
    """J(alpha) = E_s[-alpha*h(pi_k(.|s)) + alpha*h_bar], alpha = exp(log_alpha)."""
    alpha = log_alpha.exp()
    return ((-alpha) * Tensor(np.asarray(h_snapshot)) + alpha * h_bar).mean()


def action_onehot(actions: np.ndarray, n_actions: int) -> np.ndarray:
    out = np.zeros((len(actions), n_actions))
    out[np.arange(len(actions)), actions] = 1.0
    return out

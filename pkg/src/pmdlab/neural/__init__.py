"""Autodiff tape, MLPs, and optimizers."""

from .autodiff import Tensor, as_tensor, softmax, value_and_grad
from .nets import (
    CRITIC_HEAD_GAIN,
    HIDDEN_GAIN,
    POLICY_HEAD_GAIN,
    MlpParams,
    forward_np,
    forward_tape,
    init_mlp,
    load_checkpoint,
    load_mlp,
    policy_probs_np,
    policy_probs_tape,
    save_checkpoint,
    save_mlp,
)
from .optim import (
    AdamState,
    adam_init,
    adam_step,
    clip_by_global_norm,
    global_norm,
    polyak_update,
)

__all__ = [
    "Tensor",
    "as_tensor",
    "softmax",
    "value_and_grad",
    "MlpParams",
    "init_mlp",
    "forward_np",
    "forward_tape",
    "policy_probs_np",
    "policy_probs_tape",
    "save_mlp",
    "load_mlp",
    "save_checkpoint",
    "load_checkpoint",
    "HIDDEN_GAIN",
    "POLICY_HEAD_GAIN",
    "CRITIC_HEAD_GAIN",
    "AdamState",
    "adam_init",
    "adam_step",
    "global_norm",
    "clip_by_global_norm",
    "polyak_update",
]

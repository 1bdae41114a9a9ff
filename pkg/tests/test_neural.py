"""Autodiff, network init, and optimizer steps against numeric oracles."""

import numpy as np
import pytest

from pmdlab.agent.losses import (
    action_onehot,
    actor_loss_tape,
    alpha_loss_tape,
    critic_loss_tape,
)
from pmdlab.neural.autodiff import Tensor, softmax, value_and_grad
from pmdlab.neural.nets import (
    CRITIC_HEAD_GAIN,
    HIDDEN_GAIN,
    POLICY_HEAD_GAIN,
    MlpParams,
    forward_np,
    forward_tape,
    init_mlp,
    load_mlp,
    save_mlp,
)
from pmdlab.neural.optim import (
    adam_init,
    adam_step,
    clip_by_global_norm,
    global_norm,
    polyak_update,
)
from pmdlab.regularizers import DriftSpec, RegularizerSpec


def fd_check(fn, arrays, eps=1e-5, tol=1e-4):
    """Central finite differences against reverse-mode gradients.

    rel error uses max(1, |g|, |fd|) so tiny gradients are compared absolutely.
    """
    _, grads = value_and_grad(fn, arrays)
    worst = 0.0
    for i, a in enumerate(arrays):
        for flat in range(a.size):
            idx = np.unravel_index(flat, a.shape)
            orig = a[idx]
            a[idx] = orig + eps
            up, _ = value_and_grad(fn, arrays)
            a[idx] = orig - eps
            dn, _ = value_and_grad(fn, arrays)
            a[idx] = orig
            fd = (up - dn) / (2.0 * eps)
            g = grads[i][idx]
            rel = abs(g - fd) / max(1.0, abs(g), abs(fd))
            worst = max(worst, rel)
    assert worst <= tol, f"gradient mismatch, worst rel err {worst:.3e}"


def tiny_policy(rng, n_in=3, n_out=3):
    return init_mlp([n_in, 4, n_out], rng, head_gain=POLICY_HEAD_GAIN)


def split_like(leaves):
    return leaves[0::2], leaves[1::2]


def test_elementary_ops_gradients():
    rng = np.random.default_rng(0)
    x = rng.normal(size=(2, 3))

    def fn(leaves):
        t = leaves[0]
        y = (t @ leaves[1]).tanh()
        z = (y.exp() + (y * y + 1.0).log()) * 0.5
        return (z.clip(-2.0, 2.0) - z.max(axis=-1, keepdims=True)).mean()

    fd_check(fn, [x.copy(), rng.normal(size=(3, 4))])


def test_softmax_gradient_and_values():
    logits = np.array([[np.log(3.0), 0.0]])
    probs = softmax(Tensor(logits)).data
    np.testing.assert_allclose(probs, [[0.75, 0.25]], atol=1e-12)

    rng = np.random.default_rng(1)

    def fn(leaves):
        p = softmax(leaves[0])
        return (p * p).sum(axis=-1).mean()

    fd_check(fn, [rng.normal(size=(3, 5))])


def test_minimum_gradient_splits_at_winner():
    a = np.array([[1.0, 5.0]])
    b = np.array([[2.0, 3.0]])

    def fn(leaves):
        return leaves[0].minimum(leaves[1]).sum()

    _, grads = value_and_grad(fn, [a, b])
    np.testing.assert_allclose(grads[0], [[1.0, 0.0]])
    np.testing.assert_allclose(grads[1], [[0.0, 1.0]])


def test_actor_loss_gradients_all_combinations():
    rng = np.random.default_rng(2)
    regs = [
        RegularizerSpec.neg_shannon(),
        RegularizerSpec.neg_tsallis(0.5),
        RegularizerSpec.neg_tsallis(2.0),
        RegularizerSpec.sq_l2(),
        RegularizerSpec.max_(),
    ]
    drifts = [
        DriftSpec.reverse_kl(),
        DriftSpec.forward_kl(),
        DriftSpec.bregman_of(RegularizerSpec.sq_l2()),
    ]
    obs = rng.normal(size=(2, 3))
    q_hat = rng.normal(size=(2, 3))
    old = rng.dirichlet(np.ones(3), size=2)
    params = tiny_policy(rng)

    for reg in regs:
        for drift in drifts:
            def fn(leaves):
                w, b = split_like(leaves)
                return actor_loss_tape(w, b, obs, q_hat, reg, 0.07, drift, 0.3, old)

            fd_check(fn, params.arrays())


def test_critic_loss_gradient():
    rng = np.random.default_rng(3)
    net = init_mlp([3, 4, 2], rng, head_gain=1.0)
    obs = rng.normal(size=(5, 3))
    onehot = action_onehot(rng.integers(0, 2, size=5), 2)
    targets = rng.normal(size=5)

    def fn(leaves):
        w, b = split_like(leaves)
        return critic_loss_tape(w, b, obs, onehot, targets)

    fd_check(fn, net.arrays())


def test_alpha_loss_gradient_and_example():
    rng = np.random.default_rng(4)
    h_snap = rng.normal(size=8)
    h_bar = -0.4

    def fn(leaves):
        return alpha_loss_tape(leaves[0], h_snap, h_bar)

    fd_check(fn, [np.array([0.3])])

    # J(alpha) = alpha * (h_bar - mean h): at log_alpha=0, h=0, h_bar=-log 2
    val, _ = value_and_grad(
        lambda leaves: alpha_loss_tape(leaves[0], np.zeros(4), -np.log(2.0)),
        [np.array([0.0])])
    assert val == pytest.approx(-np.log(2.0), abs=1e-12)


def test_forward_np_matches_tape():
    rng = np.random.default_rng(5)
    params = init_mlp([4, 8, 8, 3], rng, head_gain=0.5)
    x = rng.normal(size=(6, 4))
    w = [Tensor(a) for a in params.weights]
    b = [Tensor(a) for a in params.biases]
    np.testing.assert_allclose(forward_np(params, x), forward_tape(w, b, x).data,
                               atol=1e-12)


def test_init_orthogonal_and_gains():
    rng = np.random.default_rng(6)
    params = init_mlp([4, 64, 64, 2], rng, head_gain=POLICY_HEAD_GAIN)
    w0 = params.weights[0]
    # rows of the (4, 64) map are orthogonal with norm equal to the gain
    gram = w0 @ w0.T
    np.testing.assert_allclose(gram, HIDDEN_GAIN ** 2 * np.eye(4), atol=1e-10)
    head = params.weights[-1]
    np.testing.assert_allclose(head.T @ head, POLICY_HEAD_GAIN ** 2 * np.eye(2),
                               atol=1e-10)
    for bias in params.biases:
        assert not bias.any()
    assert CRITIC_HEAD_GAIN == 0.0
    critic = init_mlp([4, 64, 64, 2], rng, head_gain=CRITIC_HEAD_GAIN)
    assert not critic.weights[-1].any()


def test_init_contiguous_and_seeded():
    a = init_mlp([4, 8, 2], np.random.default_rng(9), head_gain=0.01)
    b = init_mlp([4, 8, 2], np.random.default_rng(9), head_gain=0.01)
    for x, y in zip(a.arrays(), b.arrays()):
        np.testing.assert_array_equal(x, y)
        assert x.flags["C_CONTIGUOUS"]


def test_adam_first_step_oracle():
    rng = np.random.default_rng(10)
    arrays = [rng.normal(size=(3, 2)), rng.normal(size=2)]
    grads = [rng.normal(size=(3, 2)), rng.normal(size=2)]
    lr, eps = 0.0025, 1e-8
    state = adam_init(arrays, lr)
    _, stepped = adam_step(state, arrays, [g.copy() for g in grads], max_grad_norm=None)
    # bias correction makes the first update exactly lr * g / (|g| + eps)
    for a0, a1, g in zip(arrays, stepped, grads):
        np.testing.assert_allclose(a1, a0 - lr * g / (np.abs(g) + eps), atol=1e-12)


def test_adam_zero_gradient_is_identity():
    arrays = [np.ones((2, 2))]
    state = adam_init(arrays, 0.01)
    _, stepped = adam_step(state, arrays, [np.zeros((2, 2))], max_grad_norm=1.0)
    np.testing.assert_array_equal(stepped[0], arrays[0])


def test_clip_by_global_norm():
    grads = [np.array([3.0]), np.array([4.0])]
    assert global_norm(grads) == pytest.approx(5.0)
    clipped = clip_by_global_norm(grads, 1.0)
    assert global_norm(clipped) == pytest.approx(1.0)
    np.testing.assert_allclose(clipped[0], [0.6])
    untouched = clip_by_global_norm(grads, 10.0)
    np.testing.assert_array_equal(untouched[0], grads[0])


def test_polyak_retention():
    rng = np.random.default_rng(11)
    target = init_mlp([3, 4, 2], rng, head_gain=1.0)
    online = init_mlp([3, 4, 2], rng, head_gain=1.0)
    mixed = polyak_update(target, online, tau=0.95)
    for m, t, o in zip(mixed.arrays(), target.arrays(), online.arrays()):
        np.testing.assert_allclose(m, 0.95 * t + 0.05 * o, atol=1e-12)
    frozen = polyak_update(target, online, tau=1.0)
    for f, t in zip(frozen.arrays(), target.arrays()):
        np.testing.assert_array_equal(f, t)
    copied = polyak_update(target, online, tau=0.0)
    for c, o in zip(copied.arrays(), online.arrays()):
        np.testing.assert_array_equal(c, o)


def test_save_load_round_trip(tmp_path):
    rng = np.random.default_rng(12)
    params = init_mlp([5, 8, 8, 4], rng, head_gain=0.01)
    blob = save_mlp(params)
    back = load_mlp(blob)
    for a, b in zip(params.arrays(), back.arrays()):
        np.testing.assert_array_equal(a, b)
    assert back.layer_sizes() == params.layer_sizes()


def test_from_arrays_round_trip():
    rng = np.random.default_rng(13)
    params = init_mlp([3, 4, 2], rng, head_gain=1.0)
    rebuilt = MlpParams.from_arrays([a.copy() for a in params.arrays()])
    for a, b in zip(params.arrays(), rebuilt.arrays()):
        np.testing.assert_array_equal(a, b)

"""Environment dynamics against hand-computed oracles and invariants."""

import json
import math
import os
import subprocess
import sys

import numpy as np
import pytest

from pmdlab.environments import (
    ACROBOT,
    ACROBOT_BEST_RETURN,
    CARTPOLE,
    CATCH,
    DEEPSEA,
    ENV_KINDS,
    EnvConfig,
    action_count,
    bounds,
    obs_dim,
    rescaled_cartpole_suite,
    reset,
    reset_from,
    step,
)
from pmdlab.errors import ConfigurationError, EnvUsageError


def rollout(config, seed, actions):
    state, obs = reset(config, seed)
    trace = [obs]
    rewards = []
    for a in actions:
        state, res = step(config, state, a)
        trace.append(res.observation)
        rewards.append(res.reward)
        if res.done:
            break
    return np.array(trace[: len(rewards) + 1]), np.array(rewards), state


def test_action_and_obs_dims():
    assert action_count(EnvConfig(CARTPOLE)) == 2
    assert action_count(EnvConfig(ACROBOT)) == 3
    assert action_count(EnvConfig(CATCH)) == 3
    assert action_count(EnvConfig(DEEPSEA)) == 2
    assert obs_dim(EnvConfig(CARTPOLE)) == 4
    assert obs_dim(EnvConfig(ACROBOT)) == 6
    assert obs_dim(EnvConfig(CATCH)) == 50
    assert obs_dim(EnvConfig(DEEPSEA)) == 64


def test_reset_determinism():
    for kind in ENV_KINDS:
        cfg = EnvConfig(kind)
        _, a = reset(cfg, 7)
        _, b = reset(cfg, 7)
        np.testing.assert_array_equal(a, b)


def test_trajectory_determinism():
    rng = np.random.default_rng(0)
    for kind in ENV_KINDS:
        cfg = EnvConfig(kind)
        actions = rng.integers(0, action_count(cfg), size=40)
        t1, r1, _ = rollout(cfg, 123, actions)
        t2, r2, _ = rollout(cfg, 123, actions)
        np.testing.assert_array_equal(t1, t2)
        np.testing.assert_array_equal(r1, r2)


def test_cartpole_single_step_physics():
    # independent Euler step of the standard cart-pole equations
    cfg = EnvConfig(CARTPOLE)
    state, obs = reset(cfg, 11)
    x, xd, th, thd = obs
    for action in (0, 1):
        force = 10.0 if action == 1 else -10.0
        costh, sinth = math.cos(th), math.sin(th)
        temp = (force + 0.05 * thd**2 * sinth) / 1.1
        thacc = (9.8 * sinth - costh * temp) / (
            0.5 * (4.0 / 3.0 - 0.1 * costh**2 / 1.1))
        xacc = temp - 0.05 * thacc * costh / 1.1
        want = np.array([
            x + 0.02 * xd, xd + 0.02 * xacc, th + 0.02 * thd, thd + 0.02 * thacc])
        _, res = step(cfg, state, action)
        np.testing.assert_allclose(res.observation, want, atol=1e-12)
        assert res.reward == 1.0


def test_cartpole_terminates_on_angle():
    cfg = EnvConfig(CARTPOLE)
    state, _ = reset(cfg, 5)
    # constant push destabilizes the pole well before truncation
    for i in range(500):
        state, res = step(cfg, state, 1)
        if res.done:
            break
    assert res.done
    limit = 12.0 * 2.0 * math.pi / 360.0
    assert abs(state.data[2]) > limit or abs(state.data[0]) > 2.4
    assert state.step_count < 500


def test_cartpole_truncates_at_limit():
    cfg = EnvConfig(CARTPOLE, max_episode_steps=7)
    state, _ = reset(cfg, 3)
    done_flags = []
    for i in range(7):
        state, res = step(cfg, state, i % 2)
        done_flags.append(res.done)
    assert done_flags == [False] * 6 + [True]
    with pytest.raises(EnvUsageError):
        step(cfg, state, 0)


def test_acrobot_observation_structure():
    cfg = EnvConfig(ACROBOT)
    state, obs = reset(cfg, 9)
    assert obs[0] ** 2 + obs[1] ** 2 == pytest.approx(1.0, abs=1e-12)
    assert obs[2] ** 2 + obs[3] ** 2 == pytest.approx(1.0, abs=1e-12)
    _, res = step(cfg, state, 2)
    assert res.reward == -1.0


def test_acrobot_episode_bounds():
    cfg = EnvConfig(ACROBOT)
    rng = np.random.default_rng(1)
    for seed in range(3):
        actions = rng.integers(0, 3, size=500)
        _, rewards, state = rollout(cfg, seed, actions)
        assert len(rewards) <= 500
        ret = rewards.sum()
        assert -500.0 - 1e-9 <= ret <= 0.0


def test_catch_full_episode_hand_dynamics():
    cfg = EnvConfig(CATCH)
    state, obs = reset(cfg, 21)
    board = obs.reshape(10, 5)
    ball_col = int(np.argmax(board[0]))
    paddle_col = 2  # starts mid board
    assert board[9, paddle_col] == 1.0
    # steer toward the ball; ball falls one row per step
    rewards = []
    for t in range(9):
        move = int(np.sign(ball_col - paddle_col)) + 1
        state, res = step(cfg, state, move)
        paddle_col = int(np.clip(paddle_col + (move - 1), 0, 4))
        rewards.append(res.reward)
        if not res.done:
            b = res.observation.reshape(10, 5)
            assert b[t + 1, ball_col] == 1.0
    assert res.done and state.step_count == 9
    assert rewards[:-1] == [0.0] * 8
    assert rewards[-1] == 1.0  # paddle reaches any column within 9 moves


def test_catch_miss_is_minus_one():
    cfg = EnvConfig(CATCH)
    # hold still; over many seeds some balls land off paddle
    seen = set()
    for seed in range(12):
        _, rewards, _ = rollout(cfg, seed, [1] * 9)
        seen.add(rewards[-1])
    assert seen == {1.0, -1.0}


def test_deepsea_treasure_and_zero_paths():
    cfg = EnvConfig(DEEPSEA)
    _, rewards, state = rollout(cfg, 0, [1] * 8)
    assert rewards.sum() == 1.0 and len(rewards) == 8
    _, rewards, _ = rollout(cfg, 0, [0] * 8)
    assert rewards.sum() == 0.0
    # one wrong move forfeits the treasure
    _, rewards, _ = rollout(cfg, 0, [0] + [1] * 7)
    assert rewards.sum() == 0.0


def test_deepsea_observation_one_hot():
    cfg = EnvConfig(DEEPSEA, deepsea_size=4)
    state, obs = reset(cfg, 0)
    assert obs.sum() == 1.0 and obs[0] == 1.0
    state, res = step(cfg, state, 1)
    assert res.observation.sum() == 1.0
    assert res.observation[1 * 4 + 1] == 1.0


def test_reward_scale_linearity():
    rng = np.random.default_rng(2)
    for kind in ENV_KINDS:
        actions = rng.integers(0, action_count(EnvConfig(kind)), size=30)
        _, base, _ = rollout(EnvConfig(kind), 17, actions)
        _, scaled, _ = rollout(EnvConfig(kind, reward_scale=0.4), 17, actions)
        np.testing.assert_allclose(scaled, 0.4 * base, atol=1e-12)


def test_bounds_per_kind():
    assert bounds(EnvConfig(CARTPOLE)) .r_max == 500.0
    assert bounds(EnvConfig(CARTPOLE)).r_min == 0.0
    assert bounds(EnvConfig(CARTPOLE, reward_scale=0.4)).r_max == pytest.approx(200.0)
    b = bounds(EnvConfig(ACROBOT))
    assert (b.r_max, b.r_min) == (ACROBOT_BEST_RETURN, -500.0)
    b = bounds(EnvConfig(CATCH))
    assert (b.r_max, b.r_min) == (1.0, -1.0)
    # board upscaling leaves per-episode bounds alone
    b = bounds(EnvConfig(CATCH, catch_rows=20, catch_cols=10))
    assert (b.r_max, b.r_min) == (1.0, -1.0)
    b = bounds(EnvConfig(DEEPSEA))
    assert (b.r_max, b.r_min) == (1.0, 0.0)


def test_rescaled_suite():
    suite = rescaled_cartpole_suite()
    scales = [c.reward_scale for c in suite]
    assert scales == [2.0, 1.5, 1.0, 0.8, 2.0 / 3.0, 0.6, 0.4, 1.0 / 3.5, 0.2, 0.1, 0.01]
    maxes = [bounds(c).r_max for c in suite]
    np.testing.assert_allclose(
        maxes, [1000.0, 750.0, 500.0, 400.0, 1000.0 / 3.0, 300.0, 200.0,
                500.0 / 3.5, 100.0, 50.0, 5.0])


def test_reset_from_continues_stream():
    cfg = EnvConfig(CATCH)
    state, first = reset(cfg, 33)
    cols = [int(np.argmax(first.reshape(10, 5)[0]))]
    for _ in range(20):
        state, obs2 = reset_from(cfg, state)
        cols.append(int(np.argmax(obs2.reshape(10, 5)[0])))
    assert len(set(cols)) > 1  # stream advances rather than repeating


def test_invalid_configs_rejected():
    with pytest.raises(ConfigurationError):
        EnvConfig("mountaincar")
    with pytest.raises(ConfigurationError):
        EnvConfig(CARTPOLE, reward_scale=0.0)
    with pytest.raises(ConfigurationError):
        EnvConfig(CATCH, catch_rows=2)
    with pytest.raises(ConfigurationError):
        EnvConfig(CATCH, catch_cols=1)
    with pytest.raises(ConfigurationError):
        EnvConfig(DEEPSEA, deepsea_size=0)


def test_action_out_of_range():
    cfg = EnvConfig(CARTPOLE)
    state, _ = reset(cfg, 0)
    with pytest.raises(EnvUsageError):
        step(cfg, state, 2)


def test_numpy_backend_matches_numba():
    code = (
        "import json, numpy as np\n"
        "from pmdlab.environments import EnvConfig, reset, step, BACKEND\n"
        "out = {'backend': BACKEND, 'traces': {}}\n"
        "for kind in ('cartpole', 'acrobot'):\n"
        "    cfg = EnvConfig(kind)\n"
        "    state, obs = reset(cfg, 42)\n"
        "    trace = [obs.tolist()]\n"
        "    for i in range(25):\n"
        "        state, res = step(cfg, state, i % 2)\n"
        "        trace.append(res.observation.tolist())\n"
        "        if res.done:\n"
        "            break\n"
        "    out['traces'][kind] = trace\n"
        "print(json.dumps(out))\n"
    )

    def run(numba_flag):
        env = dict(os.environ, PMDLAB_NUMBA=numba_flag)
        res = subprocess.run([sys.executable, "-c", code], env=env,
                             capture_output=True, text=True, check=True)
        return json.loads(res.stdout)

    with_numba = run("1")
    pure = run("0")
    assert pure["backend"] == "numpy"
    for kind in ("cartpole", "acrobot"):
        np.testing.assert_allclose(with_numba["traces"][kind], pure["traces"][kind],
                                   atol=1e-12)

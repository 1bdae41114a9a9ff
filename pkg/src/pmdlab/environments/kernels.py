"""Physics step kernels for the two classic-control tasks.

The kernels are scalar float loops, so they are compiled with numba when
available. Setting PMDLAB_NUMBA=0 (or lacking numba entirely) selects the
pure-Python fallback; both paths run the same source.
"""

from __future__ import annotations

import math
import os

_USE_NUMBA = os.environ.get("PMDLAB_NUMBA", "1") != "0"
if _USE_NUMBA:
    try:
        from numba import njit
    except ImportError:
        _USE_NUMBA = False

BACKEND = "numba" if _USE_NUMBA else "python"

# CartPole constants
_GRAVITY = 9.8
_MASSCART = 1.0
_MASSPOLE = 0.1
_TOTAL_MASS = _MASSCART + _MASSPOLE
_HALF_POLE = 0.5
_POLEMASS_LENGTH = _MASSPOLE * _HALF_POLE
_FORCE_MAG = 10.0
_TAU = 0.02
_THETA_LIMIT = 12.0 * 2.0 * math.pi / 360.0
_X_LIMIT = 2.4

# Acrobot constants: two unit-mass, unit-length links
_LINK_COM = 0.5
_LINK_MOI = 1.0
_ACRO_DT = 0.2
_MAX_VEL_1 = 4.0 * math.pi
_MAX_VEL_2 = 9.0 * math.pi


def _cartpole_step(x, x_dot, theta, theta_dot, action):
    """One Euler step of the cart-pole; returns state and failure flag."""
    force = _FORCE_MAG if action == 1 else -_FORCE_MAG
    costheta = math.cos(theta)
    sintheta = math.sin(theta)
    temp = (force + _POLEMASS_LENGTH * theta_dot * theta_dot * sintheta) / _TOTAL_MASS
    theta_acc = (_GRAVITY * sintheta - costheta * temp) / (
        _HALF_POLE * (4.0 / 3.0 - _MASSPOLE * costheta * costheta / _TOTAL_MASS)
    )
    x_acc = temp - _POLEMASS_LENGTH * theta_acc * costheta / _TOTAL_MASS
    x = x + _TAU * x_dot
    x_dot = x_dot + _TAU * x_acc
    theta = theta + _TAU * theta_dot
    theta_dot = theta_dot + _TAU * theta_acc
    failed = x < -_X_LIMIT or x > _X_LIMIT or theta < -_THETA_LIMIT or theta > _THETA_LIMIT
    return x, x_dot, theta, theta_dot, failed


def _wrap(x, lo, hi):
    diff = hi - lo
    while x > hi:
        x = x - diff
    while x < lo:
        x = x + diff
    return x


def _acrobot_dsdt(theta1, theta2, dtheta1, dtheta2, torque):
    """Angular accelerations of the two-link pendulum (book dynamics)."""
    g = 9.8
    d1 = (
        1.0 * _LINK_COM * _LINK_COM
        + 1.0 * (1.0 + _LINK_COM * _LINK_COM + 2.0 * _LINK_COM * math.cos(theta2))
        + 2.0 * _LINK_MOI
    )
    d2 = 1.0 * (_LINK_COM * _LINK_COM + _LINK_COM * math.cos(theta2)) + _LINK_MOI
    phi2 = 1.0 * _LINK_COM * g * math.cos(theta1 + theta2 - math.pi / 2.0)
    phi1 = (
        -1.0 * _LINK_COM * dtheta2 * dtheta2 * math.sin(theta2)
        - 2.0 * _LINK_COM * dtheta2 * dtheta1 * math.sin(theta2)
        + (1.0 * _LINK_COM + 1.0) * g * math.cos(theta1 - math.pi / 2.0)
        + phi2
    )
    ddtheta2 = (
        torque
        + d2 / d1 * phi1
        - 1.0 * _LINK_COM * dtheta1 * dtheta1 * math.sin(theta2)
        - phi2
    ) / (1.0 * _LINK_COM * _LINK_COM + _LINK_MOI - d2 * d2 / d1)
    ddtheta1 = -(d2 * ddtheta2 + phi1) / d1
    return dtheta1, dtheta2, ddtheta1, ddtheta2


if _USE_NUMBA:
    _wrap = njit(cache=True)(_wrap)
    _acrobot_dsdt = njit(cache=True)(_acrobot_dsdt)


def _acrobot_step(theta1, theta2, dtheta1, dtheta2, action):
    """One RK4 step of the acrobot; returns state and goal flag."""
    torque = float(action) - 1.0
    dt = _ACRO_DT
    a1, b1, c1, d1 = _acrobot_dsdt(theta1, theta2, dtheta1, dtheta2, torque)
    a2, b2, c2, d2 = _acrobot_dsdt(
        theta1 + 0.5 * dt * a1, theta2 + 0.5 * dt * b1,
        dtheta1 + 0.5 * dt * c1, dtheta2 + 0.5 * dt * d1, torque,
    )
    a3, b3, c3, d3 = _acrobot_dsdt(
        theta1 + 0.5 * dt * a2, theta2 + 0.5 * dt * b2,
        dtheta1 + 0.5 * dt * c2, dtheta2 + 0.5 * dt * d2, torque,
    )
    a4, b4, c4, d4 = _acrobot_dsdt(
        theta1 + dt * a3, theta2 + dt * b3,
        dtheta1 + dt * c3, dtheta2 + dt * d3, torque,
    )
    theta1 = theta1 + dt / 6.0 * (a1 + 2.0 * a2 + 2.0 * a3 + a4)
    theta2 = theta2 + dt / 6.0 * (b1 + 2.0 * b2 + 2.0 * b3 + b4)
    dtheta1 = dtheta1 + dt / 6.0 * (c1 + 2.0 * c2 + 2.0 * c3 + c4)
    dtheta2 = dtheta2 + dt / 6.0 * (d1 + 2.0 * d2 + 2.0 * d3 + d4)
    theta1 = _wrap(theta1, -math.pi, math.pi)
    theta2 = _wrap(theta2, -math.pi, math.pi)
    dtheta1 = min(max(dtheta1, -_MAX_VEL_1), _MAX_VEL_1)
    dtheta2 = min(max(dtheta2, -_MAX_VEL_2), _MAX_VEL_2)
    goal = -math.cos(theta1) - math.cos(theta2 + theta1) > 1.0
    return theta1, theta2, dtheta1, dtheta2, goal


if _USE_NUMBA:
    cartpole_step = njit(cache=True)(_cartpole_step)
    acrobot_step = njit(cache=True)(_acrobot_step)
else:
    cartpole_step = _cartpole_step
    acrobot_step = _acrobot_step

"""
Tests for the steering map and the kinematic bicycle step.
"""

import math

import numpy as np
import pytest

from lanebench.schemas.simulation import SimConfig
from lanebench.sim.dynamics import VehicleState, initial_state, step, steering_to_angle, wrap_heading

FULL_LOCK = math.radians(25.0)


class TestSteeringToAngle:
    def test_zero(self):
        assert steering_to_angle(0.0) == 0.0

    def test_full_right(self):
        assert steering_to_angle(1.0) == pytest.approx(0.43633, abs=1e-5)

    @pytest.mark.parametrize("command,expected", [(1.7, FULL_LOCK), (-3.0, -FULL_LOCK)])
    def test_clamps(self, command, expected):
        assert steering_to_angle(command) == pytest.approx(expected)

    @pytest.mark.parametrize("command", [0.0, 0.1, 0.33, 0.8, 1.0, 2.5])
    def test_odd(self, command):
        assert steering_to_angle(-command) == -steering_to_angle(command)

    def test_negative_zero_normalized(self):
        assert math.copysign(1.0, steering_to_angle(-0.0)) == 1.0


class TestStep:
    def test_straight_ahead(self):
        cfg = SimConfig(t_delta=0.05)
        state = step(VehicleState(0.0, 0.0, 0.0, 10.0), 0.0, cfg)
        assert state.x == pytest.approx(0.5)
        assert state.y == 0.0
        assert state.heading == 0.0
        assert state.speed == 10.0

    def test_full_right_heading_change(self):
        cfg = SimConfig(t_delta=0.05, wheelbase=2.6)
        state = step(initial_state(10.0), 1.0, cfg)
        expected = (10.0 / 2.6) * math.tan(0.4363323129985824) * 0.05
        assert state.heading == pytest.approx(-expected, rel=1e-12)

    def test_constant_command_converges_to_circle(self):
        cfg = SimConfig(t_delta=0.05, wheelbase=2.6)
        state = initial_state(10.0)
        xs, ys = [], []
        for _ in range(150):
            state = step(state, 0.5, cfg)
            xs.append(state.x)
            ys.append(state.y)
        xs, ys = np.asarray(xs[50:]), np.asarray(ys[50:])

        # Algebraic circle fit: x^2 + y^2 + D x + E y + F = 0
        A = np.column_stack([xs, ys, np.ones_like(xs)])
        D, E, F = np.linalg.lstsq(A, -(xs ** 2 + ys ** 2), rcond=None)[0]
        radius = math.sqrt(D * D / 4 + E * E / 4 - F)
        expected = cfg.wheelbase / math.tan(steering_to_angle(0.5))
        assert radius == pytest.approx(expected, rel=0.01)
        # Right turn: the center lies to the south
        assert -E / 2 < 0

    def test_mirror_symmetry(self):
        cfg = SimConfig()
        left = right = initial_state(12.0)
        for j in range(200):
            command = 0.3 * math.sin(j / 15.0)
            right = step(right, command, cfg)
            left = step(left, -command, cfg)
            assert left.x == pytest.approx(right.x, abs=1e-12)
            assert left.y == pytest.approx(-right.y, abs=1e-12)
            assert left.heading == pytest.approx(-right.heading, abs=1e-12)

    def test_displacement_bounded_by_speed(self):
        cfg = SimConfig()
        rng = np.random.default_rng(0)
        state = initial_state(15.0)
        for command in rng.uniform(-1.5, 1.5, size=300):
            nxt = step(state, command, cfg)
            assert math.hypot(nxt.x - state.x, nxt.y - state.y) <= state.speed * cfg.t_delta + 1e-12
            assert -math.pi < nxt.heading <= math.pi
            state = nxt


@pytest.mark.parametrize("angle,expected", [
    (0.0, 0.0),
    (math.pi, math.pi),
    (-math.pi, math.pi),
    (3 * math.pi / 2, -math.pi / 2),
    (-5.0, -5.0 + 2 * math.pi),
])
def test_wrap_heading(angle, expected):
    assert wrap_heading(angle) == pytest.approx(expected)


def test_steps_m():
    assert SimConfig(duration_T=25.0, t_delta=0.05).steps_m == 500
    assert SimConfig(duration_T=1.0, t_delta=0.3).steps_m == 3
    assert SimConfig().fps == pytest.approx(20.0)

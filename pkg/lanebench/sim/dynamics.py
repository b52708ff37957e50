"""
Vehicle Dynamics
================

Kinematic bicycle model driven by a normalized steering command in [-1, 1],
where +1 is a full right turn of MAX_STEERING_DEG degrees.
"""

import math
from dataclasses import dataclass, replace
from typing import Optional

from lanebench.core.config import settings
from lanebench.schemas.simulation import SimConfig


@dataclass(frozen=True)
class VehicleState:
    x: float
    y: float
    heading: float
    speed: float

    def as_tuple(self):
        return (self.x, self.y, self.heading, self.speed)


def clamp_steering(theta_norm: float) -> float:
    return min(1.0, max(-1.0, float(theta_norm)))


def steering_to_angle(theta_norm: float, max_steering_deg: Optional[float] = None) -> float:
    """
    Map a normalized steering command to a front-wheel angle.

    Args:
        theta_norm: Command; values outside [-1, 1] are clamped
        max_steering_deg: Angle reached at |theta_norm| = 1

    Returns:
        Wheel angle in radians, positive for a right turn
    """
    max_deg = settings.MAX_STEERING_DEG if max_steering_deg is None else max_steering_deg
    # + 0.0 turns a -0.0 result into 0.0
    return clamp_steering(theta_norm) * math.radians(max_deg) + 0.0


def wrap_heading(heading: float) -> float:
    """Wrap an angle into (-pi, pi]."""
    wrapped = math.remainder(heading, 2.0 * math.pi)
    if wrapped <= -math.pi:
        wrapped += 2.0 * math.pi
    return wrapped


def initial_state(speed: float) -> VehicleState:
    """Vehicle at the road start, aligned with the centerline."""
    return VehicleState(x=0.0, y=0.0, heading=0.0, speed=float(speed))


def step(state: VehicleState, theta_norm: float, cfg: SimConfig) -> VehicleState:
    """
    Advance the vehicle one tick.

    Position integrates with the pre-update heading; a positive command turns
    right, i.e. decreases the heading.
    """
    delta = steering_to_angle(theta_norm)
    dt = cfg.t_delta
    v = state.speed
    x = state.x + v * math.cos(state.heading) * dt
    y = state.y + v * math.sin(state.heading) * dt
    heading = wrap_heading(state.heading - (v / cfg.wheelbase) * math.tan(delta) * dt)
    return replace(state, x=x, y=y, heading=heading)

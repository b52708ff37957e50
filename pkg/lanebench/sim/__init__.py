"""
Simulation Package
==================

Road geometry, vehicle dynamics and the camera model.
"""

from lanebench.sim.world import Road, build_road, lateral_deviation
from lanebench.sim.dynamics import VehicleState, steering_to_angle, step
from lanebench.sim.camera import apply_weather, read_pgm, render, write_pgm

__all__ = [
    "Road",
    "build_road",
    "lateral_deviation",
    "VehicleState",
    "steering_to_angle",
    "step",
    "apply_weather",
    "read_pgm",
    "render",
    "write_pgm",
]

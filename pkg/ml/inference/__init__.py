"""
Inference Package
=================

Steering controllers.
"""

from ml.inference.controllers import (
    BiasedController,
    Episode,
    Frame,
    LearnedController,
    NoisyController,
    OracleController,
    SteeringController,
    WindowedController,
    build_controller,
    oracle_steering,
    reference_drive,
)

__all__ = [
    "BiasedController",
    "Episode",
    "Frame",
    "LearnedController",
    "NoisyController",
    "OracleController",
    "SteeringController",
    "WindowedController",
    "build_controller",
    "oracle_steering",
    "reference_drive",
]

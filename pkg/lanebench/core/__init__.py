"""
Core package initialization.
"""

from lanebench.core.config import Settings, get_settings, settings
from lanebench.core.exceptions import (
    ConfigError,
    ControllerError,
    EndOfRoadError,
    LaneBenchError,
    MatchInputError,
    MetricInputError,
    MissingInputError,
    ReportWriteError,
    RestrictionError,
    SamplingExhaustedError,
    TrainingDivergenceError,
)
from lanebench.core.logging import setup_logging

__all__ = [
    "Settings",
    "get_settings",
    "settings",
    "setup_logging",
    "LaneBenchError",
    "ConfigError",
    "RestrictionError",
    "MissingInputError",
    "SamplingExhaustedError",
    "EndOfRoadError",
    "TrainingDivergenceError",
    "MetricInputError",
    "MatchInputError",
    "ControllerError",
    "ReportWriteError",
]

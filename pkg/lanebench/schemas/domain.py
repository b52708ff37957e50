"""
Domain Schemas
==============

Pydantic schemas for the test-input space: the domain model, the scenarios
sampled from it and the constraint violations reported against it.
"""

import math
from enum import Enum
from typing import List, Tuple

from pydantic import BaseModel, Field, field_validator, model_validator


class RoadTopology(str, Enum):
    """Road shapes the world builder can lay out."""
    STRAIGHT = "straight"
    LEFT_CURVED = "left-curved"
    RIGHT_CURVED = "right-curved"
    S_CURVE = "s-curve"


class Weather(str, Enum):
    """Weather conditions the camera can render."""
    SUNNY = "sunny"
    RAIN = "rain"
    SNOW = "snow"
    FOG = "fog"


Range = Tuple[float, float]

RANGE_FIELDS = (
    "curvature_range",
    "road_length_range",
    "lane_width_range",
    "weather_intensity_range",
    "daytime_brightness_range",
    "ego_speed_range",
)

CHOICE_FIELDS = ("road_topology_choices", "weather_choices")

# Names of the executable constraint predicates (see services.scenario_service)
CONSTRAINT_NAMES = ("speed_on_curve", "degenerate_weather", "road_covers_run")


class DomainModel(BaseModel):
    """Schema for a constrained test-input space."""
    road_topology_choices: List[RoadTopology] = Field(..., min_length=1)
    curvature_range: Range
    road_length_range: Range
    lane_width_range: Range
    weather_choices: List[Weather] = Field(..., min_length=1)
    weather_intensity_range: Range
    daytime_brightness_range: Range
    ego_speed_range: Range
    constraint_set: List[str] = Field(default_factory=list)

    @field_validator(*RANGE_FIELDS)
    @classmethod
    def _check_range(cls, value: Range) -> Range:
        lo, hi = value
        if not (math.isfinite(lo) and math.isfinite(hi)):
            raise ValueError("range bounds must be finite")
        if lo > hi:
            raise ValueError(f"empty range [{lo}, {hi}]")
        return (float(lo), float(hi))

    @field_validator(*CHOICE_FIELDS)
    @classmethod
    def _dedupe_choices(cls, value: list) -> list:
        # Choice sets keep first-seen order so sampling stays reproducible
        return list(dict.fromkeys(value))

    @model_validator(mode="after")
    def _check_constraint_names(self) -> "DomainModel":
        unknown = [name for name in self.constraint_set if name not in CONSTRAINT_NAMES]
        if unknown:
            raise ValueError(f"unknown constraints: {unknown}")
        return self


class Scenario(BaseModel):
    """Schema for one initial configuration of a simulation."""
    id: str
    road_topology: RoadTopology
    curvature: float = Field(..., ge=0, description="Curvature magnitude in 1/m")
    road_length: float = Field(..., gt=0)
    lane_width: float = Field(..., gt=0)
    weather: Weather
    weather_intensity: float
    brightness: float
    ego_speed: float = Field(..., ge=0)
    rng_seed: int = Field(..., ge=0, lt=2**64)

    @property
    def effective_curvature(self) -> float:
        """Curvature magnitude the road actually has (0 for straight roads)."""
        if self.road_topology == RoadTopology.STRAIGHT:
            return 0.0
        return self.curvature


class ConstraintViolation(BaseModel):
    """Schema for a failed domain constraint."""
    constraint: str
    reason: str

"""
Simulation Schemas
==================

Pydantic schemas for the simulation clock and the lane-departure metric.
"""

import math

from pydantic import BaseModel, Field, model_validator

from lanebench.core.config import settings


class SimConfig(BaseModel):
    """Schema for the closed-loop clock, vehicle and camera size."""
    t_delta: float = Field(default_factory=lambda: settings.T_DELTA, gt=0, description="Seconds per step")
    duration_T: float = Field(default_factory=lambda: settings.DURATION_T, gt=0, description="Run length in seconds")
    wheelbase: float = Field(default_factory=lambda: settings.WHEELBASE, gt=0)
    image_width: int = Field(default_factory=lambda: settings.IMAGE_WIDTH, ge=2)
    image_height: int = Field(default_factory=lambda: settings.IMAGE_HEIGHT, ge=2)

    @model_validator(mode="after")
    def _check_horizon(self) -> "SimConfig":
        if self.steps_m < 1:
            raise ValueError("duration_T must cover at least one step")
        return self

    @property
    def steps_m(self) -> int:
        """Number of steps m = floor(T / t_delta)."""
        # The epsilon absorbs binary rounding such as 25 / 0.05 = 499.99999...
        return int(math.floor(self.duration_T / self.t_delta + 1e-9))

    @property
    def fps(self) -> float:
        return 1.0 / self.t_delta


class MdclValue(BaseModel):
    """Schema for the Maximum Distance from Center of Lane."""
    raw_max_abs_deviation: float = Field(..., ge=0, description="Meters")
    normalized: float = Field(..., ge=0, le=1)

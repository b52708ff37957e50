"""
Match Schemas
=============

Pydantic schemas for comparable-subsequence matches and the offline
consistency records built on top of them.
"""

from typing import Optional

from pydantic import BaseModel, Field, model_validator


class MatchResult(BaseModel):
    """Schema for the recorded subsequence bound to a simulated dataset."""
    offset_x: int = Field(..., ge=0)
    length_l: int = Field(..., ge=1)
    mean_abs_angle_diff: float = Field(..., ge=0)
    comparable: bool
    epsilon: float = Field(..., ge=0)

    @model_validator(mode="after")
    def _check_flag(self) -> "MatchResult":
        if self.comparable != (self.mean_abs_angle_diff <= self.epsilon):
            raise ValueError("comparable must equal mean_abs_angle_diff <= epsilon")
        return self


class MatchRow(BaseModel):
    """Schema for one line of matches.csv."""
    sim_id: str
    real_id: str
    x: int
    l: int  # noqa: E741
    mean_diff: float
    comparable: bool


class ConsistencyRecord(BaseModel):
    """Schema for the offline results of one comparable pair."""
    sim_id: str
    real_id: str
    mae_sim: float
    mae_real: float
    abs_diff: float
    consistent: bool
    sim_larger: Optional[bool] = None

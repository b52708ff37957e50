"""
Analysis Schemas
================

Pydantic schemas for offline/online verdicts and their contingency table.
"""

from pydantic import BaseModel, Field, computed_field

from lanebench.core.config import settings


class Thresholds(BaseModel):
    """Acceptability bars; a value is acceptable when strictly below its bar."""
    mae: float = Field(default_factory=lambda: settings.MAE_THRESHOLD, gt=0)
    mdcl: float = Field(default_factory=lambda: settings.MDCL_THRESHOLD, gt=0, le=1)


class AgreementRecord(BaseModel):
    """Schema for the offline and online verdicts of one scenario."""
    scenario_id: str
    mae: float = Field(..., ge=0)
    mdcl_normalized: float = Field(..., ge=0, le=1)
    offline_acceptable: bool
    online_acceptable: bool
    in_agreement: bool


class ContingencyTable(BaseModel):
    """
    Schema for the 2x2 table of online (rows) against offline (columns) verdicts.

    n11: online and offline acceptable
    n12: online acceptable, offline not (never observed in the study)
    n21: offline acceptable, online not
    n22: neither acceptable
    """
    n11: int = Field(0, ge=0)
    n12: int = Field(0, ge=0)
    n21: int = Field(0, ge=0)
    n22: int = Field(0, ge=0)
    never_observed_cell_flag: bool = False

    @computed_field
    @property
    def total(self) -> int:
        return self.n11 + self.n12 + self.n21 + self.n22

    @computed_field
    @property
    def online_acceptable_total(self) -> int:
        return self.n11 + self.n12

    @computed_field
    @property
    def offline_acceptable_total(self) -> int:
        return self.n11 + self.n21

    @property
    def disagreement_rate(self) -> float:
        if self.total == 0:
            return 0.0
        return (self.n12 + self.n21) / self.total

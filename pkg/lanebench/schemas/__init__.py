"""
Schemas Package
===============

Pydantic schemas for everything the bench reads from or writes to disk.
"""

from lanebench.schemas.domain import (
    CONSTRAINT_NAMES,
    ConstraintViolation,
    DomainModel,
    RoadTopology,
    Scenario,
    Weather,
)
from lanebench.schemas.simulation import MdclValue, SimConfig
from lanebench.schemas.match import ConsistencyRecord, MatchResult, MatchRow
from lanebench.schemas.analysis import AgreementRecord, ContingencyTable, Thresholds
from lanebench.schemas.campaign import CampaignConfig, ControllerSpec, TrainSpec

__all__ = [
    "CONSTRAINT_NAMES",
    "ConstraintViolation",
    "DomainModel",
    "RoadTopology",
    "Scenario",
    "Weather",
    "MdclValue",
    "SimConfig",
    "ConsistencyRecord",
    "MatchResult",
    "MatchRow",
    "AgreementRecord",
    "ContingencyTable",
    "Thresholds",
    "CampaignConfig",
    "ControllerSpec",
    "TrainSpec",
]

"""
Campaign Schemas
================

Pydantic schemas for the JSON campaign configuration read by the CLI.
"""

from typing import Any, Dict, Literal, Optional, Union

from pydantic import BaseModel, Field, model_validator

from lanebench.core.config import settings
from lanebench.schemas.analysis import Thresholds
from lanebench.schemas.simulation import SimConfig

ControllerKind = Literal["oracle", "learned", "windowed", "biased", "noisy"]
BaseKind = Literal["oracle", "learned", "windowed"]


class ControllerSpec(BaseModel):
    """Schema describing which steering controller to build."""
    kind: ControllerKind = "learned"
    base: BaseKind = Field("oracle", description="Wrapped controller for biased/noisy kinds")
    model_file: Optional[str] = None
    bias: float = 0.0
    noise_sigma: float = Field(0.0, ge=0)
    noise_seed: int = 0
    window: int = Field(default_factory=lambda: settings.WINDOW, ge=1)
    oracle_mode: Literal["replay", "pursuit"] = "replay"
    lookahead: float = Field(default_factory=lambda: settings.LOOKAHEAD, gt=0)

    @property
    def needs_model(self) -> bool:
        inner = self.base if self.kind in ("biased", "noisy") else self.kind
        return inner in ("learned", "windowed")


class TrainSpec(BaseModel):
    """Schema for learned-controller hyperparameters."""
    learning_rate: float = Field(0.005, gt=0)
    momentum: float = Field(0.9, ge=0, lt=1)
    epochs: int = Field(30, ge=0)
    batch_size: int = Field(64, ge=1)
    hidden: int = Field(default_factory=lambda: settings.HIDDEN_UNITS, ge=1)
    seed: int = 0
    stride: int = Field(2, ge=1, description="Keep every stride-th frame of each training dataset")
    validation_fraction: float = Field(0.1, ge=0, lt=1)


class CampaignConfig(BaseModel):
    """Schema for a full offline-vs-online campaign."""
    domain_model: str = "data/domain/full_model.json"
    restricted_overrides: Union[str, Dict[str, Any]] = "data/domain/restricted_overrides.json"
    scenario_count: int = Field(50, ge=1)
    match_scenario_count: int = Field(100, ge=1)
    train_scenario_count: int = Field(40, ge=1)
    recording_frames: int = Field(5000, ge=1)
    sim: SimConfig = Field(default_factory=SimConfig)
    controller: ControllerSpec = Field(default_factory=ControllerSpec)
    train: TrainSpec = Field(default_factory=TrainSpec)
    epsilon: float = Field(default_factory=lambda: settings.EPSILON, ge=0)
    consistency_tol: float = Field(default_factory=lambda: settings.CONSISTENCY_TOL, ge=0)
    thresholds: Thresholds = Field(default_factory=Thresholds)
    alt_mae_threshold: float = Field(default_factory=lambda: settings.ALT_MAE_THRESHOLD, gt=0)
    jitter_sigma: float = Field(default_factory=lambda: settings.PSEUDO_REAL_JITTER, ge=0)
    seed: int = Field(0, ge=0)
    output_dir: str = "runs/campaign"
    jobs: int = Field(1, ge=1)
    write_frames: bool = True

    @model_validator(mode="after")
    def _check_model_file(self) -> "CampaignConfig":
        if self.controller.needs_model and self.controller.model_file is None:
            # Defaults to the model the train step writes
            self.controller.model_file = "models/controller.bin"
        return self

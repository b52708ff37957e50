"""
Shared pytest fixtures.
"""

import sys
from pathlib import Path

import numpy as np
import pytest

ROOT = Path(__file__).resolve().parent.parent
sys.path.insert(0, str(ROOT))

from lanebench.schemas.domain import DomainModel, Scenario  # noqa: E402
from lanebench.schemas.simulation import SimConfig  # noqa: E402
from lanebench.services.scenario_service import load_domain_model, load_overrides, restrict  # noqa: E402
from ml.inference.controllers import Frame, SteeringController  # noqa: E402

FULL_MODEL_PATH = ROOT / "data" / "domain" / "full_model.json"
OVERRIDES_PATH = ROOT / "data" / "domain" / "restricted_overrides.json"


class ConstantController(SteeringController):
    """Returns a fixed command; sees no images."""

    kind = "constant"
    uses_images = False

    def __init__(self, value: float = 0.0):
        self.value = value

    def _predict(self, frames):
        return self.value


@pytest.fixture
def full_model() -> DomainModel:
    return load_domain_model(FULL_MODEL_PATH)


@pytest.fixture
def restricted_model(full_model) -> DomainModel:
    return restrict(full_model, load_overrides(OVERRIDES_PATH))


def make_test_scenario(**overrides) -> Scenario:
    """Straight sunny 400 m road at 10 m/s unless overridden."""
    fields = dict(
        id="test-0000",
        road_topology="straight",
        curvature=0.0,
        road_length=400.0,
        lane_width=3.5,
        weather="sunny",
        weather_intensity=0.0,
        brightness=1.0,
        ego_speed=10.0,
        rng_seed=1234,
    )
    fields.update(overrides)
    return Scenario(**fields)


@pytest.fixture
def make_scenario():
    """Factory for scenarios with sensible defaults."""
    return make_test_scenario


@pytest.fixture
def short_cfg() -> SimConfig:
    """Five-second runs (100 steps)."""
    return SimConfig(duration_T=5.0)


@pytest.fixture
def blank_frame() -> Frame:
    return Frame(image=np.full((32, 32), 0.5), index=0)


@pytest.fixture
def constant_controller():
    return ConstantController

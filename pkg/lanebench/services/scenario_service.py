"""
Scenario Service
================

Constraint checking, rejection sampling and restriction of domain models.
"""

import json
from pathlib import Path
from typing import Any, Callable, Dict, List, Mapping, Optional, Union

import numpy as np
from loguru import logger
from pydantic import ValidationError

from lanebench.core.config import settings
from lanebench.core.exceptions import ConfigError, MissingInputError, RestrictionError, SamplingExhaustedError
from lanebench.schemas.domain import (
    CHOICE_FIELDS,
    CONSTRAINT_NAMES,
    RANGE_FIELDS,
    ConstraintViolation,
    DomainModel,
    RoadTopology,
    Scenario,
    Weather,
)
from lanebench.schemas.simulation import SimConfig

# Scenario field -> domain-model range it must lie in
SCENARIO_RANGES = {
    "curvature": "curvature_range",
    "road_length": "road_length_range",
    "lane_width": "lane_width_range",
    "weather_intensity": "weather_intensity_range",
    "brightness": "daytime_brightness_range",
    "ego_speed": "ego_speed_range",
}

MAX_SEED = 2**63 - 1


def curve_speed_limit(effective_curvature: float) -> float:
    """Highest ego speed allowed on a curve; decreases linearly with |curvature|."""
    return settings.CURVE_SPEED_BASE - settings.CURVE_SPEED_SLOPE * abs(effective_curvature)


def _speed_on_curve(s: Scenario, cfg: SimConfig) -> Optional[str]:
    limit = curve_speed_limit(s.effective_curvature)
    if s.effective_curvature > 0 and s.ego_speed > limit:
        return f"ego speed {s.ego_speed:.2f} m/s exceeds {limit:.2f} m/s on curvature {s.effective_curvature:.4f}/m"
    return None


def _degenerate_weather(s: Scenario, cfg: SimConfig) -> Optional[str]:
    if s.weather != Weather.SUNNY and s.weather_intensity <= 0:
        return f"{s.weather.value} weather with zero intensity"
    return None


def _road_covers_run(s: Scenario, cfg: SimConfig) -> Optional[str]:
    needed = s.ego_speed * cfg.duration_T + settings.ROAD_MARGIN
    if s.road_length < needed:
        return f"road of {s.road_length:.1f} m is shorter than the {needed:.1f} m the run needs"
    return None


CONSTRAINTS: Dict[str, Callable[[Scenario, SimConfig], Optional[str]]] = {
    "speed_on_curve": _speed_on_curve,
    "degenerate_weather": _degenerate_weather,
    "road_covers_run": _road_covers_run,
}
assert tuple(CONSTRAINTS) == CONSTRAINT_NAMES


def check_constraints(
    scenario: Scenario,
    model: DomainModel,
    cfg: Optional[SimConfig] = None,
) -> List[ConstraintViolation]:
    """
    Validate a scenario against a domain model.

    Args:
        scenario: Scenario to check
        model: Domain model it must belong to
        cfg: Simulation clock of the runs the scenario is meant for; its
            duration sets the road length road_covers_run requires

    Returns:
        Empty list when the scenario is valid; otherwise one violation per
        failed range, choice or named constraint
    """
    cfg = cfg or SimConfig()
    violations = []
    for field, range_field in SCENARIO_RANGES.items():
        value = getattr(scenario, field)
        lo, hi = getattr(model, range_field)
        if not lo <= value <= hi:
            violations.append(ConstraintViolation(
                constraint=f"{field}_range",
                reason=f"{field}={value} outside [{lo}, {hi}]",
            ))
    if scenario.road_topology not in model.road_topology_choices:
        violations.append(ConstraintViolation(
            constraint="road_topology_choice",
            reason=f"topology {scenario.road_topology.value} not allowed",
        ))
    if scenario.weather not in model.weather_choices:
        violations.append(ConstraintViolation(
            constraint="weather_choice",
            reason=f"weather {scenario.weather.value} not allowed",
        ))
    for name in model.constraint_set:
        reason = CONSTRAINTS[name](scenario, cfg)
        if reason is not None:
            violations.append(ConstraintViolation(constraint=name, reason=reason))
    return violations


def _draw(model: DomainModel, rng: np.random.Generator, scenario_id: str) -> Scenario:
    topology = model.road_topology_choices[int(rng.integers(len(model.road_topology_choices)))]
    weather = model.weather_choices[int(rng.integers(len(model.weather_choices)))]
    return Scenario(
        id=scenario_id,
        road_topology=topology,
        curvature=float(rng.uniform(*model.curvature_range)),
        road_length=float(rng.uniform(*model.road_length_range)),
        lane_width=float(rng.uniform(*model.lane_width_range)),
        weather=weather,
        weather_intensity=float(rng.uniform(*model.weather_intensity_range)),
        brightness=float(rng.uniform(*model.daytime_brightness_range)),
        ego_speed=float(rng.uniform(*model.ego_speed_range)),
        rng_seed=int(rng.integers(0, MAX_SEED)),
    )


def sample_scenario(
    model: DomainModel,
    seed: int,
    scenario_id: Optional[str] = None,
    max_attempts: Optional[int] = None,
    cfg: Optional[SimConfig] = None,
) -> Scenario:
    """
    Draw a valid scenario by rejection sampling.

    Every field is drawn uniformly from its range or choice set; draws that
    violate a constraint are rejected.

    Args:
        model: Domain model to sample from
        seed: Seed; equal (model, seed) gives an equal scenario
        scenario_id: Identifier of the result (defaults to the seed in hex)
        max_attempts: Attempt budget (defaults to settings.SAMPLING_ATTEMPTS)
        cfg: Simulation clock the scenario must cover

    Raises:
        SamplingExhaustedError: when no draw within the budget is valid
    """
    if max_attempts is None:
        max_attempts = settings.SAMPLING_ATTEMPTS
    cfg = cfg or SimConfig()
    scenario_id = scenario_id or f"s-{seed:016x}"
    rng = np.random.default_rng(seed)

    violations: List[ConstraintViolation] = []
    for attempt in range(1, max_attempts + 1):
        candidate = _draw(model, rng, scenario_id)
        violations = check_constraints(candidate, model, cfg)
        if not violations:
            if attempt > 1:
                logger.debug(f"{scenario_id}: accepted after {attempt} attempts")
            return candidate

    raise SamplingExhaustedError(
        f"no valid scenario after {max_attempts} attempts (seed {seed})",
        seed=seed,
        last_violations=[v.constraint for v in violations],
    )


def _as_range(field: str, value: Any):
    if isinstance(value, (int, float)):
        return (float(value), float(value))
    try:
        lo, hi = value
    except (TypeError, ValueError) as e:
        raise RestrictionError(f"{field} override must be a number or a [lo, hi] pair") from e
    return (float(lo), float(hi))


def restrict(model: DomainModel, overrides: Optional[Mapping[str, Any]] = None) -> DomainModel:
    """
    Narrow a domain model.

    Args:
        model: Parent model
        overrides: Field -> narrower value. Ranges accept [lo, hi] or a single
            number (a point range); choice sets accept a list; constraint_set
            may only add constraints.

    Returns:
        The restricted model

    Raises:
        RestrictionError: if an override leaves the parent model
    """
    updates: Dict[str, Any] = {}
    for field, value in (overrides or {}).items():
        if field in RANGE_FIELDS:
            lo, hi = _as_range(field, value)
            parent_lo, parent_hi = getattr(model, field)
            if lo > hi or lo < parent_lo or hi > parent_hi:
                raise RestrictionError(
                    f"{field} override [{lo}, {hi}] is not inside [{parent_lo}, {parent_hi}]",
                    field=field,
                )
            updates[field] = (lo, hi)
        elif field in CHOICE_FIELDS:
            values = [value] if isinstance(value, str) else list(value)
            enum = RoadTopology if field == "road_topology_choices" else Weather
            try:
                choices = [enum(v) for v in values]
            except ValueError as e:
                raise RestrictionError(f"{field} override: {e}", field=field) from e
            extra = [c.value for c in choices if c not in getattr(model, field)]
            if not choices or extra:
                raise RestrictionError(f"{field} override {values} is not a non-empty subset", field=field)
            updates[field] = choices
        elif field == "constraint_set":
            names = list(value)
            missing = [n for n in model.constraint_set if n not in names]
            if missing:
                raise RestrictionError(f"restriction may not drop constraints {missing}", field=field)
            updates[field] = names
        else:
            raise RestrictionError(f"unknown domain-model field: {field}", field=field)

    try:
        return DomainModel.model_validate({**model.model_dump(), **updates})
    except ValidationError as e:
        raise RestrictionError(f"invalid restricted model: {e}") from e


def load_domain_model(path: Union[str, Path]) -> DomainModel:
    """Read and validate a domain-model JSON file."""
    path = Path(path)
    if not path.exists():
        raise MissingInputError(f"domain model not found: {path}", path=str(path))
    try:
        return DomainModel.model_validate_json(path.read_text())
    except ValidationError as e:
        raise ConfigError(f"invalid domain model {path}: {e}") from e


def load_overrides(source: Union[str, Path, Mapping[str, Any]]) -> Dict[str, Any]:
    """Overrides given inline or as a JSON file path."""
    if isinstance(source, Mapping):
        return dict(source)
    path = Path(source)
    if not path.exists():
        raise MissingInputError(f"restriction overrides not found: {path}", path=str(path))
    try:
        data = json.loads(path.read_text())
    except json.JSONDecodeError as e:
        raise ConfigError(f"invalid overrides file {path}: {e}") from e
    if not isinstance(data, dict):
        raise ConfigError(f"overrides file {path} must hold a JSON object")
    return data


def write_scenario(scenario: Scenario, directory: Union[str, Path]) -> Path:
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    path = directory / f"{scenario.id}.json"
    path.write_text(scenario.model_dump_json(indent=2))
    return path


def read_scenarios(directory: Union[str, Path]) -> List[Scenario]:
    """All scenario files of a directory, sorted by id."""
    directory = Path(directory)
    if not directory.is_dir():
        raise MissingInputError(f"no scenarios at {directory}", path=str(directory))
    scenarios = [Scenario.model_validate_json(p.read_text()) for p in sorted(directory.glob("*.json"))]
    return sorted(scenarios, key=lambda s: s.id)

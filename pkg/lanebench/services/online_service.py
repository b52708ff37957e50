"""
Online Service
==============

Closed-loop simulation of a controller and the MDCL lane-departure metric.
"""

import json
from collections import deque
from dataclasses import dataclass, field
from pathlib import Path
from typing import List, Optional, Union

import numpy as np
import pandas as pd
from loguru import logger

from lanebench.core.config import settings
from lanebench.core.exceptions import EndOfRoadError, MetricInputError, MissingInputError
from lanebench.schemas.domain import Scenario
from lanebench.schemas.simulation import MdclValue, SimConfig
from lanebench.sim.camera import render
from lanebench.sim.dynamics import initial_state, step
from lanebench.sim.world import build_road
from ml.inference.controllers import Episode, Frame, SteeringController

TRACE_COLUMNS = ["step", "t", "x", "y", "heading", "theta_pred", "lateral_dev"]


@dataclass
class SimulationTrace:
    """Per-step record of one closed-loop run."""
    scenario_id: str
    cfg: SimConfig
    step: np.ndarray = field(default_factory=lambda: np.zeros(0, dtype=int))
    t: np.ndarray = field(default_factory=lambda: np.zeros(0))
    x: np.ndarray = field(default_factory=lambda: np.zeros(0))
    y: np.ndarray = field(default_factory=lambda: np.zeros(0))
    heading: np.ndarray = field(default_factory=lambda: np.zeros(0))
    speed: np.ndarray = field(default_factory=lambda: np.zeros(0))
    theta_pred: np.ndarray = field(default_factory=lambda: np.zeros(0))
    lateral_dev: np.ndarray = field(default_factory=lambda: np.zeros(0))
    aborted: bool = False
    completed_road: bool = False

    def __len__(self) -> int:
        return int(self.step.shape[0])

    def to_frame(self) -> pd.DataFrame:
        return pd.DataFrame({col: getattr(self, col) for col in TRACE_COLUMNS})


def run_closed_loop(
    controller: SteeringController,
    scenario: Scenario,
    cfg: Optional[SimConfig] = None,
    abort_deviation: Optional[float] = None,
) -> SimulationTrace:
    """
    Drive a scenario with a controller in the loop.

    Each step renders the current view, asks the controller for a command,
    records the step and only then advances the vehicle, so the command of
    step j first shows up in the pose of step j+1.

    Args:
        controller: Controller under test
        scenario: Scenario to drive
        cfg: Simulation clock
        abort_deviation: Stop once |lateral deviation| reaches this (meters)

    Returns:
        SimulationTrace of at most steps_m steps
    """
    cfg = cfg or SimConfig()
    abort_deviation = settings.ABORT_DEVIATION if abort_deviation is None else abort_deviation
    road = build_road(scenario)
    controller.reset(Episode(scenario=scenario, road=road, cfg=cfg))
    history = deque(maxlen=controller.history_window)

    state = initial_state(scenario.ego_speed)
    hint = 0
    rows: List[tuple] = []
    aborted = completed_road = False

    for j in range(cfg.steps_m):
        try:
            projection = road.project(state.x, state.y, hint)
        except EndOfRoadError:
            completed_road = True
            break
        hint = projection.index

        image = render(road, state, scenario, j, hint, cfg) if controller.uses_images else None
        history.append(Frame(image=image, index=j, pose=state))
        try:
            theta = controller.predict(list(history))
        except EndOfRoadError:
            # Oracle target or schedule ran past the road end
            completed_road = True
            break
        rows.append((j + 1, j * cfg.t_delta, state.x, state.y, state.heading, state.speed, theta, projection.deviation))

        if abs(projection.deviation) >= abort_deviation:
            aborted = True
            break
        state = step(state, theta, cfg)

    columns = np.asarray(rows, dtype=float).reshape(-1, 8)
    trace = SimulationTrace(
        scenario_id=scenario.id,
        cfg=cfg,
        step=columns[:, 0].astype(int),
        t=columns[:, 1],
        x=columns[:, 2],
        y=columns[:, 3],
        heading=columns[:, 4],
        speed=columns[:, 5],
        theta_pred=columns[:, 6],
        lateral_dev=columns[:, 7],
        aborted=aborted,
        completed_road=completed_road,
    )
    if aborted:
        logger.warning(f"{scenario.id}: {controller.kind} left the lane at step {len(trace)}, run aborted")
    elif completed_road:
        logger.warning(f"{scenario.id}: road ended after {len(trace)} of {cfg.steps_m} steps")
    return trace


def mdcl(trace: SimulationTrace, cap: Optional[float] = None) -> MdclValue:
    """
    Maximum distance from the lane center, capped and normalized to [0, 1].

    Raises:
        MetricInputError: on an empty trace
    """
    cap = settings.MDCL_CAP if cap is None else cap
    if len(trace) == 0:
        raise MetricInputError(f"trace of {trace.scenario_id} is empty")
    raw = float(np.max(np.abs(trace.lateral_dev)))
    return MdclValue(raw_max_abs_deviation=raw, normalized=min(raw, cap) / cap)


def write_trace(trace: SimulationTrace, directory: Union[str, Path]) -> MdclValue:
    """Write trace.csv and summary.json; returns the trace's MDCL."""
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    trace.to_frame().to_csv(directory / "trace.csv", index=False, float_format="%.17g")
    value = mdcl(trace)
    summary = {
        "scenario_id": trace.scenario_id,
        "steps": len(trace),
        "mdcl_raw": value.raw_max_abs_deviation,
        "mdcl_normalized": value.normalized,
        "aborted": trace.aborted,
        "completed_road": trace.completed_road,
    }
    (directory / "summary.json").write_text(json.dumps(summary, indent=2, sort_keys=True))
    return value


def read_trace_frame(directory: Union[str, Path]) -> pd.DataFrame:
    path = Path(directory) / "trace.csv"
    if not path.exists():
        raise MissingInputError(f"no trace at {path}", path=str(path))
    return pd.read_csv(path)

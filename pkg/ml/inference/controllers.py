"""
Steering Controllers
====================

The steering-controller contract and its implementations: the pure-pursuit
oracle that annotates datasets, the learned regressor under test, a windowed
variant that sees a short frame history, and error-injection wrappers.
"""

import math
from abc import ABC, abstractmethod
from dataclasses import dataclass, field
from pathlib import Path
from typing import List, Optional, Sequence, Union

import numpy as np
from loguru import logger

from lanebench.core.config import settings
from lanebench.core.exceptions import ControllerError, EndOfRoadError
from lanebench.schemas.campaign import ControllerSpec
from lanebench.schemas.domain import Scenario
from lanebench.schemas.simulation import SimConfig
from lanebench.sim.dynamics import VehicleState, clamp_steering, initial_state, step, wrap_heading
from lanebench.sim.world import Road, build_road
from ml.preprocessing.frame_features import FrameFeatureExtractor
from ml.training.train_regressor import MlpParams, TrainingReport, load_model, predict as mlp_predict


@dataclass
class Frame:
    """One controller input: a camera image plus bookkeeping."""
    image: Optional[np.ndarray]
    index: int = 0                          # simulation step the frame was taken at
    pose: Optional[VehicleState] = None     # ground truth, for privileged controllers only


@dataclass
class Episode:
    """Scenario a controller is about to drive or be evaluated on."""
    scenario: Scenario
    road: Road
    cfg: SimConfig = field(default_factory=SimConfig)

    @classmethod
    def from_scenario(cls, scenario: Scenario, cfg: Optional[SimConfig] = None) -> "Episode":
        return cls(scenario=scenario, road=build_road(scenario), cfg=cfg or SimConfig())


@dataclass
class ReferenceDrive:
    """Oracle-driven run of a scenario: the pose and label of every step."""
    poses: List[VehicleState]
    labels: np.ndarray
    progress: np.ndarray        # projection segment index per step
    truncated: bool

    def __len__(self) -> int:
        return len(self.poses)


def oracle_steering(
    road: Road,
    state: VehicleState,
    lookahead: Optional[float] = None,
    hint: Optional[int] = None,
    wheelbase: Optional[float] = None,
) -> float:
    """
    Pure-pursuit steering toward the centerline point ``lookahead`` meters ahead.

    Returns:
        Normalized command in [-1, 1], positive to the right

    Raises:
        EndOfRoadError: if the vehicle or the target lies beyond the road end
    """
    lookahead = lookahead or settings.LOOKAHEAD
    wheelbase = wheelbase or settings.WHEELBASE
    s_vehicle = road.project(state.x, state.y, hint).s
    tx, ty, _ = road.point_at(s_vehicle + lookahead)

    alpha = wrap_heading(math.atan2(ty - state.y, tx - state.x) - state.heading)
    delta_left = math.atan(2.0 * wheelbase * math.sin(alpha) / lookahead)
    theta = -delta_left / math.radians(settings.MAX_STEERING_DEG)
    return clamp_steering(theta) + 0.0


def reference_drive(
    road: Road,
    scenario: Scenario,
    cfg: Optional[SimConfig] = None,
    jitter_sigma: float = 0.0,
    seed: Optional[Union[int, list]] = None,
    lookahead: Optional[float] = None,
) -> ReferenceDrive:
    """
    Drive a scenario closed-loop with the oracle.

    With ``jitter_sigma > 0`` every label gets seeded zero-mean Gaussian noise,
    clipped to [-1, 1], and the noisy label is also what gets executed.

    Returns:
        ReferenceDrive of up to steps_m steps; truncated when the road ends first
    """
    cfg = cfg or SimConfig()
    rng = np.random.default_rng(scenario.rng_seed if seed is None else seed)
    state = initial_state(scenario.ego_speed)
    hint = 0
    poses, labels, progress = [], [], []
    truncated = False

    for _ in range(cfg.steps_m):
        try:
            hint = road.project(state.x, state.y, hint).index
            label = oracle_steering(road, state, lookahead, hint, cfg.wheelbase)
        except EndOfRoadError:
            truncated = True
            break
        if jitter_sigma > 0:
            label = clamp_steering(label + rng.normal(0.0, jitter_sigma))
        poses.append(state)
        labels.append(label)
        progress.append(hint)
        state = step(state, label, cfg)

    if truncated:
        logger.warning(f"Scenario {scenario.id}: road ended after {len(poses)} of {cfg.steps_m} steps")
    return ReferenceDrive(
        poses=poses,
        labels=np.asarray(labels, dtype=float),
        progress=np.asarray(progress, dtype=int),
        truncated=truncated,
    )


class SteeringController(ABC):
    """
    Contract of every controller: frames in, normalized steering out.

    ``predict`` receives the most recent frames, oldest first, and always
    returns a value in [-1, 1].
    """

    kind: str = "controller"
    history_window: int = 1
    uses_images: bool = True

    def reset(self, episode: Optional[Episode] = None) -> None:
        """Bind the controller to a new episode; stateless controllers ignore it."""

    def predict(self, frames: Sequence[Frame]) -> float:
        if not frames:
            raise ControllerError(f"{self.kind} controller got no frames")
        return clamp_steering(self._predict(list(frames))) + 0.0

    @abstractmethod
    def _predict(self, frames: List[Frame]) -> float:
        ...


class OracleController(SteeringController):
    """
    Ground-truth annotator used as a controller.

    ``replay`` returns the reference-drive label of the frame's step, the
    annotator seen as a perfect open-loop predictor. ``pursuit`` runs pure
    pursuit on the frame's true pose.
    """

    kind = "oracle"
    uses_images = False

    def __init__(self, mode: str = "replay", lookahead: Optional[float] = None):
        if mode not in ("replay", "pursuit"):
            raise ControllerError(f"unknown oracle mode: {mode}")
        self.mode = mode
        self.lookahead = lookahead or settings.LOOKAHEAD
        self._episode: Optional[Episode] = None
        self._schedule: Optional[np.ndarray] = None
        self._schedule_truncated = False
        self._hint = 0

    def reset(self, episode: Optional[Episode] = None) -> None:
        self._episode = episode
        self._hint = 0
        self._schedule = None
        if episode is not None and self.mode == "replay":
            drive = reference_drive(episode.road, episode.scenario, episode.cfg, lookahead=self.lookahead)
            self._schedule = drive.labels
            self._schedule_truncated = drive.truncated

    def _predict(self, frames: List[Frame]) -> float:
        if self._episode is None:
            raise ControllerError("oracle controller is not bound to an episode")
        frame = frames[-1]
        if self.mode == "replay":
            if frame.index >= len(self._schedule):
                if self._schedule_truncated:
                    raise EndOfRoadError(f"reference drive ended before step {frame.index}", step=frame.index)
                raise ControllerError(f"no oracle label for step {frame.index}")
            return float(self._schedule[frame.index])
        if frame.pose is None:
            raise ControllerError("pursuit oracle needs the frame pose")
        road = self._episode.road
        self._hint = road.project(frame.pose.x, frame.pose.y, self._hint).index
        return oracle_steering(road, frame.pose, self.lookahead, self._hint, self._episode.cfg.wheelbase)


class LearnedController(SteeringController):
    """Regressor on the features of the latest frame."""

    kind = "learned"

    def __init__(
        self,
        params: MlpParams,
        report: Optional[TrainingReport] = None,
        extractor: Optional[FrameFeatureExtractor] = None,
    ):
        self.params = params
        self.report = report
        self.extractor = extractor or FrameFeatureExtractor()

    def _features(self, frames: List[Frame]) -> np.ndarray:
        image = frames[-1].image
        if image is None:
            raise ControllerError(f"{self.kind} controller needs camera images")
        return self.extractor.transform(image)

    def _predict(self, frames: List[Frame]) -> float:
        return float(mlp_predict(self.params, self._features(frames))[0])


class WindowedController(LearnedController):
    """
    Regressor on the mean features of the last ``window`` frames.

    Short histories are padded by repeating their first frame.
    """

    kind = "windowed"

    def __init__(self, params: MlpParams, window: int = 5, **kwargs):
        super().__init__(params, **kwargs)
        if window < 1:
            raise ControllerError("window must be at least 1")
        self.history_window = window

    def _features(self, frames: List[Frame]) -> np.ndarray:
        recent = frames[-self.history_window:]
        if any(f.image is None for f in recent):
            raise ControllerError("windowed controller needs camera images")
        padded = [recent[0]] * (self.history_window - len(recent)) + recent
        return self.extractor.window_mean([f.image for f in padded])


class BiasedController(SteeringController):
    """Adds a constant offset to the wrapped controller's command."""

    kind = "biased"

    def __init__(self, inner: SteeringController, bias: float):
        self.inner = inner
        self.bias = bias
        self.history_window = inner.history_window
        self.uses_images = inner.uses_images

    def reset(self, episode: Optional[Episode] = None) -> None:
        self.inner.reset(episode)

    def _predict(self, frames: List[Frame]) -> float:
        return self.inner.predict(frames) + self.bias


class NoisyController(SteeringController):
    """Adds zero-mean Gaussian noise seeded by (seed, frame index)."""

    kind = "noisy"

    def __init__(self, inner: SteeringController, sigma: float, seed: int = 0):
        self.inner = inner
        self.sigma = sigma
        self.seed = seed
        self.history_window = inner.history_window
        self.uses_images = inner.uses_images

    def reset(self, episode: Optional[Episode] = None) -> None:
        self.inner.reset(episode)

    def _predict(self, frames: List[Frame]) -> float:
        rng = np.random.default_rng([self.seed, frames[-1].index])
        return self.inner.predict(frames) + rng.normal(0.0, self.sigma)


def _build_base(kind: str, spec: ControllerSpec, model_dir: Optional[Path]) -> SteeringController:
    if kind == "oracle":
        return OracleController(mode=spec.oracle_mode, lookahead=spec.lookahead)
    if spec.model_file is None:
        raise ControllerError(f"{kind} controller needs a model_file")
    model_path = Path(spec.model_file)
    if not model_path.is_absolute() and model_dir is not None:
        model_path = model_dir / model_path
    params = load_model(model_path)
    if kind == "windowed":
        return WindowedController(params, window=spec.window)
    return LearnedController(params)


def build_controller(spec: ControllerSpec, model_dir: Optional[Union[str, Path]] = None) -> SteeringController:
    """
    Controller factory.

    Args:
        spec: Controller description
        model_dir: Directory relative model files are resolved against

    Returns:
        A fresh, unbound controller
    """
    model_dir = Path(model_dir) if model_dir is not None else None
    if spec.kind in ("biased", "noisy"):
        inner = _build_base(spec.base, spec, model_dir)
        if spec.kind == "biased":
            return BiasedController(inner, spec.bias)
        return NoisyController(inner, spec.noise_sigma, spec.noise_seed)
    return _build_base(spec.kind, spec, model_dir)

"""
Offline Evaluator Module
========================

Open-loop evaluation of steering controllers: frames are fed in recorded
order and predictions never influence later frames.
"""

from collections import deque
from dataclasses import dataclass
from typing import TYPE_CHECKING, Any, Dict, Optional, Sequence

import numpy as np
from loguru import logger
from sklearn.metrics import mean_absolute_error, mean_squared_error

from lanebench.core.exceptions import MetricInputError
from lanebench.schemas.simulation import SimConfig
from ml.inference.controllers import Episode, Frame, SteeringController

if TYPE_CHECKING:
    from lanebench.services.dataset_service import LabeledDataset


def _check_inputs(labels: Sequence[float], preds: Sequence[float]):
    labels = np.asarray(labels, dtype=float)
    preds = np.asarray(preds, dtype=float)
    if labels.size == 0 or preds.size == 0:
        raise MetricInputError("metric inputs are empty")
    if labels.shape != preds.shape:
        raise MetricInputError(
            f"metric inputs differ in length: {labels.shape[0]} labels, {preds.shape[0]} predictions"
        )
    return labels, preds


def mae(labels: Sequence[float], preds: Sequence[float]) -> float:
    """Mean absolute error."""
    labels, preds = _check_inputs(labels, preds)
    return float(mean_absolute_error(labels, preds))


def rmse(labels: Sequence[float], preds: Sequence[float]) -> float:
    """Root mean squared error."""
    labels, preds = _check_inputs(labels, preds)
    return float(np.sqrt(mean_squared_error(labels, preds)))


@dataclass
class OfflineResult:
    mae: float
    rmse: float
    per_frame_abs_error: np.ndarray
    predictions: np.ndarray

    def to_dict(self) -> Dict[str, Any]:
        return {"mae": self.mae, "rmse": self.rmse, "n_frames": int(self.predictions.shape[0])}


def predict_dataset(
    controller: SteeringController,
    ds: "LabeledDataset",
    cfg: Optional[SimConfig] = None,
) -> np.ndarray:
    """
    Run a controller over a dataset frame by frame.

    The controller is re-bound and its frame history cleared at every episode
    start, so windowed controllers never see frames of another drive.
    """
    cfg = cfg or SimConfig(t_delta=1.0 / ds.fps)
    predictions = np.empty(len(ds), dtype=float)
    for start, end, scenario in ds.episodes():
        controller.reset(Episode.from_scenario(scenario, cfg) if scenario is not None else None)
        history = deque(maxlen=controller.history_window)
        for i in range(start, end):
            history.append(Frame(image=ds.images[i], index=int(ds.steps[i]), pose=ds.pose(i)))
            predictions[i] = controller.predict(list(history))
    return predictions


def evaluate_offline(
    controller: SteeringController,
    ds: "LabeledDataset",
    cfg: Optional[SimConfig] = None,
) -> OfflineResult:
    """
    Open-loop MAE/RMSE of a controller on a labeled dataset.

    Args:
        controller: Controller under test
        ds: Dataset whose labels are the ground truth
        cfg: Clock used when controllers replay a scenario (defaults to the dataset fps)

    Returns:
        OfflineResult
    """
    predictions = predict_dataset(controller, ds, cfg)
    result = OfflineResult(
        mae=mae(ds.labels, predictions),
        rmse=rmse(ds.labels, predictions),
        per_frame_abs_error=np.abs(ds.labels - predictions),
        predictions=predictions,
    )
    logger.debug(f"{controller.kind} on {ds.source_id}: MAE={result.mae:.4f} RMSE={result.rmse:.4f}")
    return result


class OfflineEvaluator:
    """
    Evaluates one controller on many datasets.
    """

    def __init__(self, controller: SteeringController, cfg: Optional[SimConfig] = None):
        self.controller = controller
        self.cfg = cfg

    def evaluate(self, ds: "LabeledDataset") -> OfflineResult:
        return evaluate_offline(self.controller, ds, self.cfg)

    def evaluate_many(self, datasets: Sequence["LabeledDataset"]) -> Dict[str, OfflineResult]:
        return {ds.source_id: self.evaluate(ds) for ds in datasets}

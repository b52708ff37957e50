"""
Matching Service
================

Finds, for a simulator-generated dataset, the equal-length subsequence of a
recorded dataset with the closest steering labels, and checks whether the
controller's offline results on the two agree.
"""

from pathlib import Path
from typing import Iterable, List, Optional, Sequence, Tuple, Union

import numpy as np
import pandas as pd
from loguru import logger
from numpy.lib.stride_tricks import sliding_window_view

from lanebench.core.config import settings
from lanebench.core.exceptions import MatchInputError
from lanebench.schemas.match import ConsistencyRecord, MatchResult, MatchRow
from lanebench.schemas.simulation import SimConfig
from lanebench.services.dataset_service import LabeledDataset
from ml.evaluation.offline_evaluator import evaluate_offline
from ml.inference.controllers import SteeringController

# Offsets whose mean label difference is within this of the best count as ties
TIE_TOLERANCE = 1e-12

LabelSource = Union[LabeledDataset, Sequence[float], np.ndarray]


def _labels(source: LabelSource) -> np.ndarray:
    if isinstance(source, LabeledDataset):
        return source.labels
    return np.asarray(source, dtype=float)


def offset_costs(sim_labels: np.ndarray, real_labels: np.ndarray) -> np.ndarray:
    """Sum of absolute label differences at every offset of the recording."""
    windows = sliding_window_view(real_labels, sim_labels.shape[0])
    return np.abs(windows - sim_labels).sum(axis=1)


def find_comparable(
    sim_ds: LabelSource,
    real_ds: LabelSource,
    epsilon: Optional[float] = None,
    seed: Optional[Union[int, list]] = 0,
) -> MatchResult:
    """
    Exhaustive search for the recorded subsequence closest to a simulated one.

    Args:
        sim_ds: Simulated dataset (or its labels), length l
        real_ds: Recorded dataset (or its labels), length k >= l
        epsilon: Largest mean absolute label difference of a comparable pair
        seed: Seed of the uniform tie-break between equally good offsets

    Returns:
        MatchResult for the best offset

    Raises:
        MatchInputError: if the simulated dataset is empty or longer than the recording
    """
    epsilon = settings.EPSILON if epsilon is None else epsilon
    sim = _labels(sim_ds)
    real = _labels(real_ds)
    if sim.size == 0:
        raise MatchInputError("simulated dataset is empty")
    if sim.size > real.size:
        raise MatchInputError(
            f"simulated dataset ({sim.size} frames) is longer than the recording ({real.size} frames)"
        )

    costs = offset_costs(sim, real)
    ties = np.flatnonzero(costs <= costs.min() + TIE_TOLERANCE * sim.size)
    if ties.size > 1:
        offset = int(np.random.default_rng(seed).choice(ties))
    else:
        offset = int(ties[0])

    mean_diff = float(costs[offset] / sim.size)
    return MatchResult(
        offset_x=offset,
        length_l=int(sim.size),
        mean_abs_angle_diff=mean_diff,
        comparable=mean_diff <= epsilon,
        epsilon=epsilon,
    )


def consistency(mae_sim: float, mae_real: float, tol: Optional[float] = None) -> bool:
    """Offline results agree when their MAEs differ by at most ``tol``."""
    tol = settings.CONSISTENCY_TOL if tol is None else tol
    return abs(mae_sim - mae_real) <= tol


class MatchingService:
    """
    Matches simulated datasets against one recording and compares the
    controller's offline results on every comparable pair.
    """

    def __init__(self, epsilon: Optional[float] = None, consistency_tol: Optional[float] = None):
        self.epsilon = settings.EPSILON if epsilon is None else epsilon
        self.consistency_tol = settings.CONSISTENCY_TOL if consistency_tol is None else consistency_tol

    def match(self, sim_ds: LabeledDataset, recording: LabeledDataset, seed=0) -> Tuple[MatchRow, MatchResult]:
        result = find_comparable(sim_ds, recording, self.epsilon, seed)
        row = MatchRow(
            sim_id=sim_ds.source_id,
            real_id=recording.source_id,
            x=result.offset_x,
            l=result.length_l,
            mean_diff=result.mean_abs_angle_diff,
            comparable=result.comparable,
        )
        return row, result

    def check_pair(
        self,
        controller: SteeringController,
        sim_ds: LabeledDataset,
        recording: LabeledDataset,
        result: MatchResult,
        cfg: Optional[SimConfig] = None,
    ) -> ConsistencyRecord:
        """Offline MAE of a controller on sim(s) and on the matched recorded subsequence."""
        real_sub = recording.subsequence(result.offset_x, result.length_l)
        mae_sim = evaluate_offline(controller, sim_ds, cfg).mae
        mae_real = evaluate_offline(controller, real_sub, cfg).mae
        return ConsistencyRecord(
            sim_id=sim_ds.source_id,
            real_id=recording.source_id,
            mae_sim=mae_sim,
            mae_real=mae_real,
            abs_diff=abs(mae_sim - mae_real),
            consistent=consistency(mae_sim, mae_real, self.consistency_tol),
            sim_larger=mae_sim > mae_real,
        )

    def run(
        self,
        controller: SteeringController,
        sim_datasets: Iterable[LabeledDataset],
        recording: LabeledDataset,
        seeds: Iterable[int],
        cfg: Optional[SimConfig] = None,
    ) -> Tuple[List[MatchRow], List[ConsistencyRecord]]:
        rows, records = [], []
        for sim_ds, seed in zip(sim_datasets, seeds):
            row, result = self.match(sim_ds, recording, seed)
            rows.append(row)
            if result.comparable:
                records.append(self.check_pair(controller, sim_ds, recording, result, cfg))
        n_comparable = sum(r.comparable for r in rows)
        logger.info(f"{n_comparable} of {len(rows)} simulated datasets have a comparable recorded subsequence")
        return rows, records


def write_matches(rows: Sequence[MatchRow], path: Union[str, Path]) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    frame = pd.DataFrame([r.model_dump() for r in rows], columns=list(MatchRow.model_fields))
    frame.sort_values("sim_id").to_csv(path, index=False, float_format="%.17g")
    return path


def write_consistency(records: Sequence[ConsistencyRecord], path: Union[str, Path]) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    frame = pd.DataFrame([r.model_dump() for r in records], columns=list(ConsistencyRecord.model_fields))
    frame.sort_values("sim_id").to_csv(path, index=False, float_format="%.17g")
    return path


def read_matches(path: Union[str, Path]) -> List[MatchRow]:
    path = Path(path)
    if not path.exists():
        return []
    frame = pd.read_csv(path)
    return [MatchRow(**rec) for rec in frame.to_dict(orient="records")]


def read_consistency(path: Union[str, Path]) -> List[ConsistencyRecord]:
    path = Path(path)
    if not path.exists():
        return []
    frame = pd.read_csv(path)
    frame = frame.astype(object).where(frame.notna(), None)
    return [ConsistencyRecord(**rec) for rec in frame.to_dict(orient="records")]

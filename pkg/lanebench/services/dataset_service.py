"""
Dataset Service
===============

Labeled camera datasets: generation from the oracle reference drive
(simulator-generated and pseudo-real recordings), recording assembly and the
on-disk directory format.
"""

import json
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Iterable, Iterator, List, Optional, Sequence, Tuple, Union

import numpy as np
import pandas as pd
from loguru import logger

from lanebench.core.config import settings
from lanebench.core.exceptions import ConfigError, MissingInputError
from lanebench.schemas.domain import Scenario
from lanebench.schemas.simulation import SimConfig
from lanebench.sim.camera import read_pgm, render, write_pgm
from lanebench.sim.dynamics import VehicleState
from lanebench.sim.world import build_road
from ml.inference.controllers import reference_drive

SIMULATED = "simulated"
PSEUDO_REAL = "pseudo_real"


@dataclass
class LabeledDataset:
    """
    Ordered (image, steering label) sequence with per-frame ground truth.

    A dataset is made of one or more episodes (continuous drives); each
    episode starts at an index listed in ``episode_starts`` and has its
    scenario at the same position in ``scenarios``.
    """
    images: np.ndarray          # (n, H, W)
    labels: np.ndarray          # (n,)
    poses: np.ndarray           # (n, 4): x, y, heading, speed
    steps: np.ndarray           # (n,) simulation step of each frame within its episode
    provenance: str
    source_id: str
    fps: float
    scenarios: List[Scenario] = field(default_factory=list)
    episode_starts: np.ndarray = field(default_factory=lambda: np.zeros(1, dtype=int))
    truncated: bool = False

    def __post_init__(self):
        if len(self.labels) == 0:
            raise ConfigError(f"dataset {self.source_id} is empty")
        if np.any(np.abs(self.labels) > 1.0):
            raise ConfigError(f"dataset {self.source_id} has labels outside [-1, 1]")

    def __len__(self) -> int:
        return int(self.labels.shape[0])

    @property
    def scenario(self) -> Optional[Scenario]:
        return self.scenarios[0] if len(self.scenarios) == 1 else None

    def episodes(self) -> Iterator[Tuple[int, int, Optional[Scenario]]]:
        """(start, end, scenario) of every episode."""
        bounds = list(self.episode_starts) + [len(self)]
        for i in range(len(self.episode_starts)):
            scenario = self.scenarios[i] if i < len(self.scenarios) else None
            yield int(bounds[i]), int(bounds[i + 1]), scenario

    def pose(self, i: int) -> VehicleState:
        return VehicleState(*(float(v) for v in self.poses[i]))

    def subsequence(self, x: int, length: int) -> "LabeledDataset":
        """Frames x .. x+length-1, keeping episode structure."""
        if x < 0 or length < 1 or x + length > len(self):
            raise ConfigError(f"subsequence ({x}, {length}) outside dataset of {len(self)} frames")
        end = x + length
        starts, scenarios = [], []
        for i, (e_start, e_end, scenario) in enumerate(self.episodes()):
            if e_end <= x or e_start >= end:
                continue
            starts.append(max(e_start, x) - x)
            if scenario is not None:
                scenarios.append(scenario)
        return replace(
            self,
            images=self.images[x:end],
            labels=self.labels[x:end],
            poses=self.poses[x:end],
            steps=self.steps[x:end],
            scenarios=scenarios,
            episode_starts=np.asarray(starts, dtype=int),
        )

    @classmethod
    def concat(cls, datasets: Sequence["LabeledDataset"], source_id: str, provenance: Optional[str] = None) -> "LabeledDataset":
        """Join datasets into one multi-episode dataset."""
        if not datasets:
            raise ConfigError("nothing to concatenate")
        starts, scenarios, offset = [], [], 0
        for ds in datasets:
            starts.extend(int(s) + offset for s in ds.episode_starts)
            scenarios.extend(ds.scenarios)
            offset += len(ds)
        return cls(
            images=np.concatenate([ds.images for ds in datasets]),
            labels=np.concatenate([ds.labels for ds in datasets]),
            poses=np.concatenate([ds.poses for ds in datasets]),
            steps=np.concatenate([ds.steps for ds in datasets]),
            provenance=provenance or datasets[0].provenance,
            source_id=source_id,
            fps=datasets[0].fps,
            scenarios=scenarios,
            episode_starts=np.asarray(starts, dtype=int),
            truncated=any(ds.truncated for ds in datasets),
        )


def _drive_dataset(
    scenario: Scenario,
    cfg: SimConfig,
    jitter_sigma: float,
    seed,
    provenance: str,
    lookahead: Optional[float],
) -> LabeledDataset:
    road = build_road(scenario)
    drive = reference_drive(road, scenario, cfg, jitter_sigma=jitter_sigma, seed=seed, lookahead=lookahead)
    if len(drive) == 0:
        raise ConfigError(f"scenario {scenario.id} produced no frames")

    images = np.stack([
        render(road, pose, scenario, frame_index=j, progress_index=int(drive.progress[j]), cfg=cfg)
        for j, pose in enumerate(drive.poses)
    ])
    return LabeledDataset(
        images=images,
        labels=drive.labels,
        poses=np.asarray([p.as_tuple() for p in drive.poses], dtype=float),
        steps=np.arange(len(drive), dtype=int),
        provenance=provenance,
        source_id=scenario.id,
        fps=cfg.fps,
        scenarios=[scenario],
        episode_starts=np.zeros(1, dtype=int),
        truncated=drive.truncated,
    )


def generate_sim_dataset(
    scenario: Scenario,
    cfg: Optional[SimConfig] = None,
    lookahead: Optional[float] = None,
) -> LabeledDataset:
    """
    Simulator-generated dataset sim(s): oracle-driven frames with oracle labels.

    Args:
        scenario: Scenario to drive
        cfg: Simulation clock and image size

    Returns:
        LabeledDataset of steps_m frames, shorter and flagged truncated when
        the road ends first
    """
    cfg = cfg or SimConfig()
    logger.debug(f"Generating simulated dataset for {scenario.id}")
    return _drive_dataset(scenario, cfg, 0.0, None, SIMULATED, lookahead)


def generate_pseudo_real_dataset(
    scenario: Scenario,
    cfg: Optional[SimConfig] = None,
    jitter_sigma: Optional[float] = None,
    seed: Optional[int] = None,
    lookahead: Optional[float] = None,
) -> LabeledDataset:
    """
    Emulated real-life recording of a scenario.

    Same drive as generate_sim_dataset, except every label carries seeded
    human-like jitter that is also executed.
    """
    cfg = cfg or SimConfig()
    jitter_sigma = settings.PSEUDO_REAL_JITTER if jitter_sigma is None else jitter_sigma
    seed = scenario.rng_seed if seed is None else seed
    logger.debug(f"Generating pseudo-real dataset for {scenario.id} (sigma={jitter_sigma})")
    return _drive_dataset(scenario, cfg, jitter_sigma, seed, PSEUDO_REAL, lookahead)


def assemble_recording(
    scenarios: Iterable[Scenario],
    n_frames: int,
    cfg: Optional[SimConfig] = None,
    jitter_sigma: Optional[float] = None,
    recording_id: str = "recording",
) -> LabeledDataset:
    """
    Concatenate pseudo-real drives until ``n_frames`` frames are collected.

    Raises:
        ConfigError: if the scenarios run out first
    """
    parts: List[LabeledDataset] = []
    collected = 0
    for scenario in scenarios:
        if collected >= n_frames:
            break
        ds = generate_pseudo_real_dataset(scenario, cfg, jitter_sigma)
        parts.append(ds)
        collected += len(ds)
    if collected < n_frames:
        raise ConfigError(f"recording needs {n_frames} frames, scenarios yielded {collected}")
    recording = LabeledDataset.concat(parts, source_id=recording_id, provenance=PSEUDO_REAL)
    logger.info(f"Assembled recording {recording_id}: {n_frames} frames from {len(parts)} drives")
    return recording.subsequence(0, n_frames)


def write_dataset(ds: LabeledDataset, directory: Union[str, Path], write_frames: bool = True) -> Path:
    """
    Persist a dataset as manifest.json, labels.csv, poses.csv and frames/NNNNN.pgm.

    Without frames the images are re-rendered from poses when read back.
    """
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    manifest = {
        "source_id": ds.source_id,
        "provenance": ds.provenance,
        "fps": ds.fps,
        "n_frames": len(ds),
        "image_height": int(ds.images.shape[1]),
        "image_width": int(ds.images.shape[2]),
        "truncated": ds.truncated,
        "episode_starts": [int(s) for s in ds.episode_starts],
        "scenarios": [s.model_dump(mode="json") for s in ds.scenarios],
        "frames_written": write_frames,
    }
    (directory / "manifest.json").write_text(json.dumps(manifest, indent=2, sort_keys=True))

    pd.DataFrame({"frame_index": np.arange(len(ds)), "theta_label": ds.labels}).to_csv(
        directory / "labels.csv", index=False, float_format="%.17g"
    )
    poses = pd.DataFrame(ds.poses, columns=["x", "y", "heading", "speed"])
    poses.insert(0, "step", ds.steps)
    poses.insert(0, "frame_index", np.arange(len(ds)))
    poses.to_csv(directory / "poses.csv", index=False, float_format="%.17g")

    if write_frames:
        frames_dir = directory / "frames"
        frames_dir.mkdir(exist_ok=True)
        for i, img in enumerate(ds.images):
            write_pgm(img, frames_dir / f"{i:05d}.pgm")
    return directory


def _rerender(manifest: dict, poses: pd.DataFrame, starts: List[int]) -> np.ndarray:
    cfg = SimConfig(
        t_delta=1.0 / manifest["fps"],
        image_width=manifest["image_width"],
        image_height=manifest["image_height"],
    )
    scenarios = [Scenario.model_validate(s) for s in manifest["scenarios"]]
    bounds = starts + [len(poses)]
    images = []
    for e, scenario in enumerate(scenarios):
        road = build_road(scenario)
        for i in range(bounds[e], bounds[e + 1]):
            row = poses.iloc[i]
            # Expected progress along the road seeds the projection window
            guess = road.index_at(row["step"] * row["speed"] * cfg.t_delta)
            hint = road.project(row["x"], row["y"], guess).index
            state = VehicleState(row["x"], row["y"], row["heading"], row["speed"])
            images.append(render(road, state, scenario, int(row["step"]), hint, cfg))
    return np.stack(images)


def read_dataset(directory: Union[str, Path]) -> LabeledDataset:
    """Load a dataset directory written by write_dataset."""
    directory = Path(directory)
    manifest_path = directory / "manifest.json"
    if not manifest_path.exists():
        raise MissingInputError(f"no dataset at {directory}", path=str(directory))
    manifest = json.loads(manifest_path.read_text())

    labels = pd.read_csv(directory / "labels.csv")["theta_label"].to_numpy(dtype=float)
    poses = pd.read_csv(directory / "poses.csv")
    starts = [int(s) for s in manifest["episode_starts"]]

    if manifest.get("frames_written", True):
        images = np.stack([read_pgm(directory / "frames" / f"{i:05d}.pgm") for i in range(len(labels))])
    else:
        images = _rerender(manifest, poses, starts)

    return LabeledDataset(
        images=images,
        labels=labels,
        poses=poses[["x", "y", "heading", "speed"]].to_numpy(dtype=float),
        steps=poses["step"].to_numpy(dtype=int),
        provenance=manifest["provenance"],
        source_id=manifest["source_id"],
        fps=float(manifest["fps"]),
        scenarios=[Scenario.model_validate(s) for s in manifest["scenarios"]],
        episode_starts=np.asarray(starts, dtype=int),
        truncated=bool(manifest["truncated"]),
    )

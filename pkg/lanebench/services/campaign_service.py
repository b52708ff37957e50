"""
Campaign Service
================

The pipeline steps behind the CLI commands. Every step reads its inputs
from, and writes its outputs to, the campaign output directory, so any step
can be rerun on its own and reproduces the same files.

Layout of the output directory:

    scenarios/<stream>/<id>.json
    datasets/sim/<id>/                simulator-generated datasets
    datasets/pseudo_real/recording/   emulated real-life recording
    models/controller.bin             learned controller (+ training_report.json)
    offline/offline_results.csv       offline/per_frame/<id>.csv
    online/<id>/trace.csv             online/<id>/summary.json, online/mdcl.csv
    match/matches.csv                 match/consistency.csv
    report/                           report.json and figures
"""

import json
import math
from pathlib import Path
from typing import Any, Dict, List, Optional, Tuple

import numpy as np
import pandas as pd
from joblib import Parallel, delayed
from loguru import logger

from lanebench.core.exceptions import MissingInputError
from lanebench.schemas.analysis import AgreementRecord
from lanebench.schemas.campaign import CampaignConfig, ControllerSpec
from lanebench.schemas.domain import DomainModel, Scenario
from lanebench.schemas.simulation import SimConfig
from lanebench.services.analysis_service import classify
from lanebench.services.dataset_service import (
    LabeledDataset,
    assemble_recording,
    generate_sim_dataset,
    read_dataset,
    write_dataset,
)
from lanebench.services.matching_service import (
    MatchingService,
    read_consistency,
    read_matches,
    write_consistency,
    write_matches,
)
from lanebench.services.online_service import read_trace_frame, run_closed_loop, write_trace
from lanebench.services.report_service import DisagreementExample, emit_report
from lanebench.services.scenario_service import (
    load_domain_model,
    load_overrides,
    read_scenarios,
    restrict,
    sample_scenario,
    write_scenario,
)
from ml.evaluation.offline_evaluator import evaluate_offline
from ml.inference.controllers import build_controller
from ml.training.train_regressor import RegressorTrainer, save_model

# Per-stream salts; a scenario's seed is (master seed ^ salt) ^ index
STREAM_SALTS = {
    "eval": 0x0E7A1,
    "train": 0x07EA1,
    "match": 0x03A7C,
    "recording": 0x05EC0,
}
SIM_STREAMS = ("eval", "train", "match")
RECORDING_ID = "recording"
# Spare drives sampled for the recording in case a drive is cut short
RECORDING_SPARES = 2


def stream_seed(master_seed: int, stream: str, index: int) -> int:
    return (master_seed ^ STREAM_SALTS[stream]) ^ index


class CampaignPaths:
    """Locations inside a campaign output directory."""

    def __init__(self, root):
        self.root = Path(root)

    def scenarios(self, stream: str) -> Path:
        return self.root / "scenarios" / stream

    def sim_dataset(self, scenario_id: str) -> Path:
        return self.root / "datasets" / "sim" / scenario_id

    @property
    def recording(self) -> Path:
        return self.root / "datasets" / "pseudo_real" / RECORDING_ID

    def model(self, spec: ControllerSpec) -> Path:
        model_file = Path(spec.model_file or "models/controller.bin")
        return model_file if model_file.is_absolute() else self.root / model_file

    @property
    def offline(self) -> Path:
        return self.root / "offline"

    @property
    def online(self) -> Path:
        return self.root / "online"

    @property
    def match(self) -> Path:
        return self.root / "match"

    @property
    def report(self) -> Path:
        return self.root / "report"


def _models(config: CampaignConfig) -> Tuple[DomainModel, DomainModel]:
    full = load_domain_model(config.domain_model)
    restricted = restrict(full, load_overrides(config.restricted_overrides))
    return full, restricted


def _stream_counts(config: CampaignConfig) -> Dict[str, int]:
    drives = math.ceil(config.recording_frames / config.sim.steps_m) + RECORDING_SPARES
    return {
        "eval": config.scenario_count,
        "train": config.train_scenario_count,
        "match": config.match_scenario_count,
        "recording": drives,
    }


def _parallel(config: CampaignConfig):
    return Parallel(n_jobs=config.jobs, prefer="processes")


def cmd_sample(config: CampaignConfig) -> Dict[str, Any]:
    """Sample every scenario stream and write one JSON file per scenario."""
    paths = CampaignPaths(config.output_dir)
    full, restricted = _models(config)
    models = {"eval": full, "train": full, "match": restricted, "recording": restricted}

    counts = {}
    for stream, count in _stream_counts(config).items():
        for index in range(count):
            scenario = sample_scenario(
                models[stream],
                stream_seed(config.seed, stream, index),
                scenario_id=f"{stream}-{index:04d}",
                cfg=config.sim,
            )
            write_scenario(scenario, paths.scenarios(stream))
        counts[stream] = count
        logger.info(f"Sampled {count} {stream} scenarios")
    return {"scenarios": counts}


def _sim_dataset_job(scenario: Scenario, cfg: SimConfig, directory: Path, write_frames: bool) -> Tuple[str, int, bool]:
    ds = generate_sim_dataset(scenario, cfg)
    write_dataset(ds, directory, write_frames)
    return scenario.id, len(ds), ds.truncated


def cmd_dataset(config: CampaignConfig) -> Dict[str, Any]:
    """Generate simulated datasets for every sim stream and the pseudo-real recording."""
    paths = CampaignPaths(config.output_dir)
    scenarios = [s for stream in SIM_STREAMS for s in read_scenarios(paths.scenarios(stream))]

    results = _parallel(config)(
        delayed(_sim_dataset_job)(s, config.sim, paths.sim_dataset(s.id), config.write_frames)
        for s in scenarios
    )
    truncated = sorted(sid for sid, _, cut in results if cut)
    if truncated:
        logger.warning(f"{len(truncated)} simulated datasets were cut short: {truncated}")

    recording = assemble_recording(
        read_scenarios(paths.scenarios("recording")),
        config.recording_frames,
        config.sim,
        config.jitter_sigma,
        recording_id=RECORDING_ID,
    )
    write_dataset(recording, paths.recording, config.write_frames)
    logger.info(f"Wrote {len(results)} simulated datasets and a {len(recording)}-frame recording")
    return {"sim_datasets": len(results), "truncated": truncated, "recording_frames": len(recording)}


def cmd_train(config: CampaignConfig) -> Dict[str, Any]:
    """Train the learned controller on the train-stream datasets."""
    paths = CampaignPaths(config.output_dir)
    datasets = [read_dataset(paths.sim_dataset(s.id)) for s in read_scenarios(paths.scenarios("train"))]
    params, report = RegressorTrainer(config.train).train(datasets)

    model_path = save_model(params, paths.model(config.controller))
    report_path = model_path.with_name("training_report.json")
    report_path.write_text(report.model_dump_json(indent=2))
    return {
        "model_file": str(model_path),
        "final_train_mae": report.final_train_mae,
        "final_val_mae": report.final_val_mae,
    }


def _offline_job(spec: ControllerSpec, root: Path, ds_dir: Path, cfg: SimConfig, errors_dir: Path) -> Dict[str, Any]:
    controller = build_controller(spec, model_dir=root)
    ds = read_dataset(ds_dir)
    result = evaluate_offline(controller, ds, cfg)
    pd.DataFrame({"frame_index": np.arange(len(ds)), "abs_error": result.per_frame_abs_error}).to_csv(
        errors_dir / f"{ds.source_id}.csv", index=False, float_format="%.17g"
    )
    return {"scenario_id": ds.source_id, **result.to_dict()}


def cmd_offline(config: CampaignConfig) -> Dict[str, Any]:
    """Offline MAE/RMSE of the configured controller on every eval dataset."""
    paths = CampaignPaths(config.output_dir)
    scenarios = read_scenarios(paths.scenarios("eval"))
    errors_dir = paths.offline / "per_frame"
    errors_dir.mkdir(parents=True, exist_ok=True)

    rows = _parallel(config)(
        delayed(_offline_job)(config.controller, paths.root, paths.sim_dataset(s.id), config.sim, errors_dir)
        for s in scenarios
    )
    frame = pd.DataFrame(sorted(rows, key=lambda r: r["scenario_id"]))
    frame.to_csv(paths.offline / "offline_results.csv", index=False, float_format="%.17g")
    logger.info(f"Offline: mean MAE {frame['mae'].mean():.4f} over {len(frame)} datasets")
    return {"datasets": len(frame), "mean_mae": float(frame["mae"].mean())}


def _online_job(spec: ControllerSpec, root: Path, scenario: Scenario, cfg: SimConfig, trace_dir: Path) -> Dict[str, Any]:
    controller = build_controller(spec, model_dir=root)
    trace = run_closed_loop(controller, scenario, cfg)
    value = write_trace(trace, trace_dir)
    return {
        "scenario_id": scenario.id,
        "steps": len(trace),
        "mdcl_raw": value.raw_max_abs_deviation,
        "mdcl_normalized": value.normalized,
        "aborted": trace.aborted,
        "completed_road": trace.completed_road,
    }


def cmd_online(config: CampaignConfig) -> Dict[str, Any]:
    """Closed-loop runs of the configured controller on every eval scenario."""
    paths = CampaignPaths(config.output_dir)
    scenarios = read_scenarios(paths.scenarios("eval"))
    rows = _parallel(config)(
        delayed(_online_job)(config.controller, paths.root, s, config.sim, paths.online / s.id)
        for s in scenarios
    )
    frame = pd.DataFrame(sorted(rows, key=lambda r: r["scenario_id"]))
    frame.to_csv(paths.online / "mdcl.csv", index=False, float_format="%.17g")
    logger.info(f"Online: {int((frame['mdcl_normalized'] >= config.thresholds.mdcl).sum())} of {len(frame)} runs unacceptable")
    return {"runs": len(frame), "aborted": int(frame["aborted"].sum())}


def _match_job(
    spec: ControllerSpec,
    root: Path,
    ds_dir: Path,
    recording: LabeledDataset,
    seed: int,
    config: CampaignConfig,
):
    service = MatchingService(config.epsilon, config.consistency_tol)
    sim_ds = read_dataset(ds_dir)
    row, result = service.match(sim_ds, recording, seed)
    record = None
    if result.comparable:
        controller = build_controller(spec, model_dir=root)
        record = service.check_pair(controller, sim_ds, recording, result, config.sim)
    return row, record


def cmd_match(config: CampaignConfig) -> Dict[str, Any]:
    """Match every match-stream dataset against the recording and check offline consistency."""
    paths = CampaignPaths(config.output_dir)
    recording = read_dataset(paths.recording)
    scenarios = read_scenarios(paths.scenarios("match"))

    results = _parallel(config)(
        delayed(_match_job)(
            config.controller,
            paths.root,
            paths.sim_dataset(s.id),
            recording,
            stream_seed(config.seed, "match", i),
            config,
        )
        for i, s in enumerate(scenarios)
    )
    rows = [row for row, _ in results]
    records = [rec for _, rec in results if rec is not None]
    write_matches(rows, paths.match / "matches.csv")
    write_consistency(records, paths.match / "consistency.csv")

    n_comparable = sum(r.comparable for r in rows)
    logger.info(f"Match: {n_comparable}/{len(rows)} comparable, {sum(r.consistent for r in records)} consistent")
    return {"scenarios": len(rows), "comparable": n_comparable, "consistent": sum(r.consistent for r in records)}


def _read_csv(path: Path) -> pd.DataFrame:
    if not path.exists():
        raise MissingInputError(f"missing {path}; run the step that writes it first", path=str(path))
    return pd.read_csv(path)


def _disagreement_example(paths: CampaignPaths, records: List[AgreementRecord]) -> Optional[DisagreementExample]:
    for record in records:
        if record.offline_acceptable and not record.online_acceptable:
            errors = _read_csv(paths.offline / "per_frame" / f"{record.scenario_id}.csv")
            trace = read_trace_frame(paths.online / record.scenario_id)
            return DisagreementExample(
                scenario_id=record.scenario_id,
                per_frame_abs_error=errors["abs_error"].to_numpy(),
                t=trace["t"].to_numpy(),
                lateral_dev=trace["lateral_dev"].to_numpy(),
            )
    return None


def cmd_analyze(config: CampaignConfig) -> Dict[str, Any]:
    """Classify every eval scenario and write the report."""
    paths = CampaignPaths(config.output_dir)
    offline = _read_csv(paths.offline / "offline_results.csv")
    online = _read_csv(paths.online / "mdcl.csv")
    joined = offline.merge(online, on="scenario_id", how="inner").sort_values("scenario_id")
    if len(joined) != len(offline) or len(joined) != len(online):
        raise MissingInputError("offline and online results cover different scenarios")

    records = [
        classify(row.scenario_id, float(row.mae), float(row.mdcl_normalized), config.thresholds)
        for row in joined.itertuples()
    ]
    matches = read_matches(paths.match / "matches.csv")
    consistency = read_consistency(paths.match / "consistency.csv")

    emit_report(
        records,
        matches,
        paths.report,
        consistency_records=consistency,
        thresholds=config.thresholds,
        alt_mae_threshold=config.alt_mae_threshold,
        disagreement_example=_disagreement_example(paths, records),
    )
    report = json.loads((paths.report / "report.json").read_text())
    return {"contingency": report["summary"]["contingency"], "findings": report["summary"]["findings"]}


PIPELINE = (
    ("sample", cmd_sample),
    ("dataset", cmd_dataset),
    ("train", cmd_train),
    ("offline", cmd_offline),
    ("online", cmd_online),
    ("match", cmd_match),
    ("analyze", cmd_analyze),
)


def cmd_campaign(config: CampaignConfig) -> Dict[str, Any]:
    """Every step in order."""
    summary = {}
    for name, step in PIPELINE:
        logger.info(f"Campaign step: {name}")
        summary[name] = step(config)
    return summary

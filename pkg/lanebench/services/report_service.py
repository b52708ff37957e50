"""
Report Service
==============

Writes the campaign report: report.json with every verdict and finding,
and static SVG figures.
"""

import json
from dataclasses import dataclass
from pathlib import Path
from typing import Dict, List, Optional, Sequence, Union

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402
from loguru import logger  # noqa: E402

from lanebench.core.exceptions import ReportWriteError  # noqa: E402
from lanebench.schemas.analysis import AgreementRecord, Thresholds  # noqa: E402
from lanebench.schemas.match import ConsistencyRecord, MatchRow  # noqa: E402
from lanebench.services.analysis_service import summarize, summarize_consistency  # noqa: E402

# Fixed salt and no timestamp keep repeated SVG output byte-identical
SVG_RC = {"svg.hashsalt": "lanebench", "svg.fonttype": "path"}
SVG_METADATA = {"Date": None}


@dataclass
class DisagreementExample:
    """Offline and online view of one offline-acceptable, online-unacceptable scenario."""
    scenario_id: str
    per_frame_abs_error: np.ndarray
    t: np.ndarray
    lateral_dev: np.ndarray


def build_scatter_figure(records: Sequence[AgreementRecord], thresholds: Thresholds):
    """MAE against normalized MDCL per scenario, with both acceptability bars."""
    fig, ax = plt.subplots(figsize=(6, 4.5))
    mae = [r.mae for r in records]
    mdcl = [r.mdcl_normalized for r in records]
    colors = ["tab:blue" if r.in_agreement else "tab:red" for r in records]
    ax.scatter(mae, mdcl, c=colors, s=18)
    ax.axvline(thresholds.mae, color="gray", linestyle="--", linewidth=1)
    ax.axhline(thresholds.mdcl, color="gray", linestyle="--", linewidth=1)
    ax.set_xlabel("offline MAE (normalized steering)")
    ax.set_ylabel("online MDCL (normalized)")
    ax.set_ylim(-0.02, 1.05)
    ax.set_title("Offline vs online verdicts")
    fig.tight_layout()
    return fig, ax


def build_error_histogram(records: Sequence[AgreementRecord], thresholds: Thresholds):
    fig, (ax_mae, ax_mdcl) = plt.subplots(1, 2, figsize=(8, 3.5))
    ax_mae.hist([r.mae for r in records], bins=20, color="tab:blue")
    ax_mae.axvline(thresholds.mae, color="gray", linestyle="--", linewidth=1)
    ax_mae.set_xlabel("offline MAE")
    ax_mae.set_ylabel("scenarios")
    ax_mdcl.hist([r.mdcl_normalized for r in records], bins=20, range=(0.0, 1.0), color="tab:orange")
    ax_mdcl.axvline(thresholds.mdcl, color="gray", linestyle="--", linewidth=1)
    ax_mdcl.set_xlabel("online MDCL")
    fig.tight_layout()
    return fig, (ax_mae, ax_mdcl)


def build_disagreement_figure(example: DisagreementExample):
    fig, (ax_off, ax_on) = plt.subplots(2, 1, figsize=(7, 5))
    ax_off.plot(np.arange(len(example.per_frame_abs_error)), example.per_frame_abs_error, linewidth=0.8)
    ax_off.set_ylabel("|label - prediction|")
    ax_off.set_xlabel("frame")
    ax_off.set_title(f"{example.scenario_id}: offline error (top), online deviation (bottom)")
    ax_on.plot(example.t, example.lateral_dev, color="tab:red", linewidth=0.8)
    ax_on.axhline(0.0, color="gray", linewidth=0.5)
    ax_on.set_ylabel("lateral deviation (m)")
    ax_on.set_xlabel("time (s)")
    fig.tight_layout()
    return fig, (ax_off, ax_on)


def _save(fig, path: Path) -> None:
    with plt.rc_context(SVG_RC):
        fig.savefig(path, format="svg", metadata=SVG_METADATA)
    plt.close(fig)


def emit_report(
    records: Sequence[AgreementRecord],
    matches: Sequence[MatchRow],
    out_dir: Union[str, Path],
    consistency_records: Sequence[ConsistencyRecord] = (),
    thresholds: Optional[Thresholds] = None,
    alt_mae_threshold: Optional[float] = None,
    disagreement_example: Optional[DisagreementExample] = None,
) -> Dict[str, Path]:
    """
    Write report.json, scatter.svg, errors_hist.svg and, given an example,
    disagreement.svg.

    Returns:
        Name -> path of every written file

    Raises:
        ReportWriteError: if the directory cannot be written
    """
    thresholds = thresholds or Thresholds()
    records = sorted(records, key=lambda r: r.scenario_id)
    matches = sorted(matches, key=lambda m: m.sim_id)
    consistency_records = sorted(consistency_records, key=lambda c: c.sim_id)
    out_dir = Path(out_dir)

    report = {
        "n_scenarios": len(records),
        "records": [r.model_dump() for r in records],
        "summary": summarize(records, thresholds, alt_mae_threshold),
    }
    pairs = summarize_consistency(matches, consistency_records)
    if pairs is not None:
        report["comparable_pairs"] = {
            "summary": pairs,
            "matches": [m.model_dump() for m in matches],
            "consistency": [c.model_dump() for c in consistency_records],
        }
    if disagreement_example is not None:
        report["disagreement_example"] = disagreement_example.scenario_id

    written: Dict[str, Path] = {}
    with plt.rc_context(SVG_RC):
        try:
            out_dir.mkdir(parents=True, exist_ok=True)
            path = out_dir / "report.json"
            path.write_text(json.dumps(report, indent=2, sort_keys=True))
            written["report"] = path

            figures: List = [
                ("scatter", build_scatter_figure(records, thresholds)[0]),
                ("errors_hist", build_error_histogram(records, thresholds)[0]),
            ]
            if disagreement_example is not None:
                figures.append(("disagreement", build_disagreement_figure(disagreement_example)[0]))
            for name, fig in figures:
                path = out_dir / f"{name}.svg"
                _save(fig, path)
                written[name] = path
        except OSError as e:
            raise ReportWriteError(f"cannot write report to {out_dir}: {e}", path=str(out_dir)) from e

    logger.info(f"Report written to {out_dir} ({', '.join(sorted(written))})")
    return written

"""
Analysis Service
================

Per-scenario offline/online verdicts, their contingency table and the
summary findings of a campaign.
"""

from typing import Any, Dict, List, Optional, Sequence

import numpy as np
from loguru import logger
from sklearn.metrics import confusion_matrix

from lanebench.core.config import settings
from lanebench.schemas.analysis import AgreementRecord, ContingencyTable, Thresholds
from lanebench.schemas.match import ConsistencyRecord, MatchRow


def classify(
    scenario_id: str,
    mae: float,
    mdcl: float,
    thresholds: Optional[Thresholds] = None,
) -> AgreementRecord:
    """
    Offline and online verdicts of one scenario.

    A value is acceptable when strictly below its threshold.
    """
    thresholds = thresholds or Thresholds()
    offline_ok = mae < thresholds.mae
    online_ok = mdcl < thresholds.mdcl
    return AgreementRecord(
        scenario_id=scenario_id,
        mae=mae,
        mdcl_normalized=mdcl,
        offline_acceptable=offline_ok,
        online_acceptable=online_ok,
        in_agreement=offline_ok == online_ok,
    )


def reclassify(records: Sequence[AgreementRecord], thresholds: Thresholds) -> List[AgreementRecord]:
    return [classify(r.scenario_id, r.mae, r.mdcl_normalized, thresholds) for r in records]


def contingency(records: Sequence[AgreementRecord]) -> ContingencyTable:
    """
    Count scenarios by online (rows) and offline (columns) verdict.

    Flags, and logs a warning for, any scenario that is acceptable online but
    not offline.
    """
    if not records:
        return ContingencyTable()
    online = [r.online_acceptable for r in records]
    offline = [r.offline_acceptable for r in records]
    (n11, n12), (n21, n22) = confusion_matrix(online, offline, labels=[True, False])
    table = ContingencyTable(n11=int(n11), n12=int(n12), n21=int(n21), n22=int(n22))
    if table.n12 > 0:
        table.never_observed_cell_flag = True
        logger.warning(f"{table.n12} scenario(s) acceptable online but not offline")
    return table


def summarize(
    records: Sequence[AgreementRecord],
    thresholds: Optional[Thresholds] = None,
    alt_mae_threshold: Optional[float] = None,
) -> Dict[str, Any]:
    """Table and boolean findings of a campaign, plus the alternative-threshold table."""
    thresholds = thresholds or Thresholds()
    alt_mae_threshold = settings.ALT_MAE_THRESHOLD if alt_mae_threshold is None else alt_mae_threshold
    table = contingency(records)

    alt_thresholds = Thresholds(mae=alt_mae_threshold, mdcl=thresholds.mdcl)
    alt_table = contingency(reclassify(records, alt_thresholds))

    return {
        "thresholds": thresholds.model_dump(),
        "contingency": table.model_dump(),
        "findings": {
            "disagreement_count": table.n12 + table.n21,
            "disagreement_rate": table.disagreement_rate,
            "offline_more_optimistic": table.n12 == 0 and table.n21 > 0,
            "never_observed_cell_empty": table.n12 == 0,
        },
        "threshold_sensitivity": {
            "thresholds": alt_thresholds.model_dump(),
            "contingency": alt_table.model_dump(),
            "never_observed_cell_empty": alt_table.n12 == 0,
            "conclusion_unchanged": (alt_table.n12 == 0) == (table.n12 == 0),
        },
    }


def summarize_consistency(
    matches: Sequence[MatchRow],
    records: Sequence[ConsistencyRecord],
) -> Optional[Dict[str, Any]]:
    """Comparable-pair and offline-consistency statistics; None without matches."""
    if not matches:
        return None
    n_comparable = sum(m.comparable for m in matches)
    diffs = np.asarray([r.abs_diff for r in records], dtype=float)
    inconsistent = [r for r in records if not r.consistent]
    return {
        "n_scenarios": len(matches),
        "n_comparable": n_comparable,
        "comparable_rate": n_comparable / len(matches),
        "n_checked": len(records),
        "mean_abs_mae_diff": float(diffs.mean()) if diffs.size else None,
        "max_abs_mae_diff": float(diffs.max()) if diffs.size else None,
        "consistent_rate": (len(records) - len(inconsistent)) / len(records) if records else None,
        "inconsistent_sim_larger": sum(bool(r.sim_larger) for r in inconsistent),
    }

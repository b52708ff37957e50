"""
Tests for verdict classification, the contingency table and the report.
"""

import json
import random

import numpy as np
import pytest

from lanebench.core.exceptions import ReportWriteError
from lanebench.schemas.analysis import Thresholds
from lanebench.schemas.match import ConsistencyRecord, MatchRow
from lanebench.services.analysis_service import classify, contingency, summarize, summarize_consistency
from lanebench.services.report_service import DisagreementExample, build_scatter_figure, emit_report

# (mae, mdcl) pairs landing in each cell of the table
CELL_VALUES = {
    "n11": (0.05, 0.3),
    "n12": (0.15, 0.3),
    "n21": (0.05, 1.0),
    "n22": (0.15, 1.0),
}


def records_for(n11=0, n12=0, n21=0, n22=0):
    counts = {"n11": n11, "n12": n12, "n21": n21, "n22": n22}
    records = []
    for cell, count in counts.items():
        mae, mdcl = CELL_VALUES[cell]
        records.extend(classify(f"{cell}-{i:04d}", mae, mdcl) for i in range(count))
    return records


class TestClassify:
    def test_both_acceptable(self):
        record = classify("s", 0.05, 0.3)
        assert record.offline_acceptable and record.online_acceptable
        assert record.in_agreement

    def test_offline_optimistic(self):
        record = classify("s", 0.05, 1.0)
        assert record.offline_acceptable
        assert not record.online_acceptable
        assert not record.in_agreement

    def test_online_optimistic(self):
        record = classify("s", 0.15, 0.3)
        assert not record.offline_acceptable
        assert record.online_acceptable
        assert not record.in_agreement

    def test_boundaries_unacceptable(self):
        record = classify("s", 0.1, 0.7)
        assert not record.offline_acceptable
        assert not record.online_acceptable
        assert record.in_agreement

    def test_custom_thresholds(self):
        record = classify("s", 0.07, 0.3, Thresholds(mae=0.05, mdcl=0.7))
        assert not record.offline_acceptable

    def test_monotone(self):
        grid = np.linspace(0.0, 1.0, 101)
        offline = [classify("s", m, 0.5).offline_acceptable for m in grid]
        online = [classify("s", 0.05, d).online_acceptable for d in grid]
        # Once unacceptable, larger values stay unacceptable
        assert offline == sorted(offline, reverse=True)
        assert online == sorted(online, reverse=True)


class TestContingency:
    def test_first_published_table(self):
        table = contingency(records_for(4, 0, 22, 24))
        assert (table.n11, table.n12, table.n21, table.n22) == (4, 0, 22, 24)
        assert table.total == 50
        assert table.disagreement_rate == pytest.approx(0.44)
        assert not table.never_observed_cell_flag

    def test_second_published_table(self):
        table = contingency(records_for(9, 0, 17, 24))
        assert (table.n11, table.n12, table.n21, table.n22) == (9, 0, 17, 24)
        assert table.disagreement_rate == pytest.approx(0.34)

    def test_all_acceptable(self):
        table = contingency(records_for(n11=12))
        assert (table.n11, table.n12, table.n21, table.n22) == (12, 0, 0, 0)

    def test_never_observed_cell_flagged(self):
        table = contingency(records_for(3, 1, 2, 0))
        assert table.n12 == 1
        assert table.never_observed_cell_flag

    def test_empty(self):
        table = contingency([])
        assert table.total == 0
        assert table.disagreement_rate == 0.0

    def test_permutation_invariant(self):
        records = records_for(5, 2, 7, 3)
        shuffled = list(records)
        random.Random(3).shuffle(shuffled)
        assert contingency(shuffled) == contingency(records)

    def test_marginals(self):
        table = contingency(records_for(4, 1, 22, 23))
        assert table.online_acceptable_total == 5
        assert table.offline_acceptable_total == 26


class TestSummarize:
    def test_findings(self):
        summary = summarize(records_for(4, 0, 22, 24))
        findings = summary["findings"]
        assert findings["disagreement_count"] == 22
        assert findings["disagreement_rate"] == pytest.approx(0.44)
        assert findings["offline_more_optimistic"] is True
        assert findings["never_observed_cell_empty"] is True
        assert summary["contingency"]["total"] == 50
        assert summary["thresholds"] == {"mae": 0.1, "mdcl": 0.7}

    def test_offline_more_optimistic_needs_disagreement(self):
        assert summarize(records_for(n11=5))["findings"]["offline_more_optimistic"] is False
        assert summarize(records_for(3, 1, 2, 0))["findings"]["offline_more_optimistic"] is False

    def test_threshold_sensitivity(self):
        records = [classify("a", 0.07, 0.3), classify("b", 0.07, 1.0), classify("c", 0.02, 0.2)]
        sensitivity = summarize(records, alt_mae_threshold=0.05)["threshold_sensitivity"]
        assert sensitivity["thresholds"] == {"mae": 0.05, "mdcl": 0.7}
        table = sensitivity["contingency"]
        assert (table["n11"], table["n12"], table["n21"], table["n22"]) == (1, 1, 0, 1)
        assert sensitivity["never_observed_cell_empty"] is False
        assert sensitivity["conclusion_unchanged"] is False

    def test_consistency_summary(self):
        matches = [
            MatchRow(sim_id="sim-0000", real_id="r", x=3, l=10, mean_diff=0.02, comparable=True),
            MatchRow(sim_id="sim-0001", real_id="r", x=9, l=10, mean_diff=0.4, comparable=False),
        ]
        records = [
            ConsistencyRecord(
                sim_id="sim-0000", real_id="r", mae_sim=0.034, mae_real=0.061,
                abs_diff=0.027, consistent=True, sim_larger=False,
            )
        ]
        summary = summarize_consistency(matches, records)
        assert summary["comparable_rate"] == 0.5
        assert summary["mean_abs_mae_diff"] == pytest.approx(0.027)
        assert summary["consistent_rate"] == 1.0
        assert summarize_consistency([], []) is None


class TestEmitReport:
    @pytest.fixture
    def records(self):
        rng = np.random.default_rng(7)
        return [
            classify(f"eval-{i:04d}", float(rng.uniform(0.0, 0.2)), float(rng.uniform(0.0, 1.0)))
            for i in range(50)
        ]

    def test_scatter_cardinality(self, records):
        fig, ax = build_scatter_figure(records, Thresholds())
        assert len(ax.collections[0].get_offsets()) == 50
        assert len(ax.lines) == 2

    def test_files_and_content(self, records, tmp_path):
        written = emit_report(records, [], tmp_path / "report")
        assert sorted(written) == ["errors_hist", "report", "scatter"]
        for path in written.values():
            assert path.exists()
        report = json.loads((tmp_path / "report" / "report.json").read_text())
        assert "comparable_pairs" not in report
        assert report["n_scenarios"] == 50
        ids = [r["scenario_id"] for r in report["records"]]
        assert ids == sorted(ids)
        table = report["summary"]["contingency"]
        assert table["n11"] + table["n12"] + table["n21"] + table["n22"] == 50
        findings = report["summary"]["findings"]
        assert findings["offline_more_optimistic"] == (table["n12"] == 0 and table["n21"] > 0)
        assert (tmp_path / "report" / "scatter.svg").read_text().lstrip().startswith("<?xml")

    def test_comparable_pairs_section(self, records, tmp_path):
        matches = [MatchRow(sim_id="sim-0000", real_id="r", x=0, l=5, mean_diff=0.01, comparable=True)]
        emit_report(records, matches, tmp_path)
        report = json.loads((tmp_path / "report.json").read_text())
        assert report["comparable_pairs"]["summary"]["n_comparable"] == 1

    def test_disagreement_figure(self, records, tmp_path):
        example = DisagreementExample(
            scenario_id="eval-0001",
            per_frame_abs_error=np.full(20, 0.05),
            t=np.arange(20) * 0.05,
            lateral_dev=-np.linspace(0.0, 3.0, 20),
        )
        written = emit_report(records, [], tmp_path, disagreement_example=example)
        assert written["disagreement"].exists()
        assert json.loads((tmp_path / "report.json").read_text())["disagreement_example"] == "eval-0001"

    def test_order_independent_and_deterministic(self, records, tmp_path):
        emit_report(records, [], tmp_path / "a")
        emit_report(list(reversed(records)), [], tmp_path / "b")
        for name in ("report.json", "scatter.svg"):
            assert (tmp_path / "a" / name).read_bytes() == (tmp_path / "b" / name).read_bytes()

    def test_unwritable_directory(self, records, tmp_path):
        blocker = tmp_path / "file"
        blocker.write_text("not a directory")
        with pytest.raises(ReportWriteError):
            emit_report(records, [], blocker / "report")

"""
Services Package
================

Scenario sampling, dataset generation, closed-loop runs, matching, analysis,
reporting and the campaign pipeline.
"""

from lanebench.services.scenario_service import check_constraints, restrict, sample_scenario
from lanebench.services.dataset_service import (
    LabeledDataset,
    generate_pseudo_real_dataset,
    generate_sim_dataset,
)
from lanebench.services.online_service import SimulationTrace, mdcl, run_closed_loop
from lanebench.services.matching_service import MatchingService, consistency, find_comparable
from lanebench.services.analysis_service import classify, contingency
from lanebench.services.report_service import emit_report

__all__ = [
    "check_constraints",
    "restrict",
    "sample_scenario",
    "LabeledDataset",
    "generate_pseudo_real_dataset",
    "generate_sim_dataset",
    "SimulationTrace",
    "mdcl",
    "run_closed_loop",
    "MatchingService",
    "consistency",
    "find_comparable",
    "classify",
    "contingency",
    "emit_report",
]

"""
Evaluation Package
==================

Open-loop controller evaluation.
"""

from ml.evaluation.offline_evaluator import OfflineEvaluator, OfflineResult, evaluate_offline, mae, rmse

__all__ = [
    "OfflineEvaluator",
    "OfflineResult",
    "evaluate_offline",
    "mae",
    "rmse",
]

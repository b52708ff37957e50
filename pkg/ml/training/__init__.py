"""
Training Package
================

Steering regressor training.
"""

from ml.training.train_regressor import (
    MlpParams,
    RegressorTrainer,
    TrainingReport,
    gradient_check,
    load_model,
    save_model,
    train_regressor,
)

__all__ = [
    "MlpParams",
    "RegressorTrainer",
    "TrainingReport",
    "gradient_check",
    "load_model",
    "save_model",
    "train_regressor",
]

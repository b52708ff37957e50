"""
ML Package
==========

Learning half of the bench: frame features, the steering regressor,
steering controllers and open-loop evaluation.
"""

from ml.preprocessing import FrameFeatureExtractor
from ml.training import RegressorTrainer, train_regressor
from ml.inference import SteeringController, build_controller
from ml.evaluation import OfflineEvaluator, evaluate_offline

__all__ = [
    "FrameFeatureExtractor",
    "RegressorTrainer",
    "train_regressor",
    "SteeringController",
    "build_controller",
    "OfflineEvaluator",
    "evaluate_offline",
]

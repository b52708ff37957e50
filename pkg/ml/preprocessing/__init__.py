"""
Preprocessing Package
=====================

Frame preprocessing and feature extraction.
"""

from ml.preprocessing.frame_features import FrameFeatureExtractor

__all__ = [
    "FrameFeatureExtractor"
]

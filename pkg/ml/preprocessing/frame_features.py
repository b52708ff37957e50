"""
Frame Features Module
=====================

Turns camera frames into the feature vectors learned controllers consume.
"""

from typing import Sequence

import numpy as np
from scipy.ndimage import median_filter

PREPROCESSING_NAME = "median1x3+standardize"


class FrameFeatureExtractor:
    """
    Fixed frame preprocessing for learned steering controllers.

    Each frame goes through a horizontal median filter (removes isolated rain
    and snow pixels without blurring the near-vertical lane markings), then a
    per-image standardization that cancels global brightness and fog level.
    """

    def __init__(self, filter_width: int = 3, min_std: float = 1e-6):
        """
        Initialize extractor.

        Args:
            filter_width: Width of the horizontal median filter
            min_std: Frames flatter than this map to all-zero features
        """
        self.filter_width = filter_width
        self.min_std = min_std

    def transform_batch(self, images: np.ndarray) -> np.ndarray:
        """
        Extract features for a stack of frames.

        Args:
            images: (n, H, W) intensities

        Returns:
            (n, H*W) feature matrix
        """
        images = np.asarray(images, dtype=float)
        if images.ndim == 2:
            images = images[None]
        filtered = median_filter(images, size=(1, 1, self.filter_width), mode="nearest")
        flat = filtered.reshape(filtered.shape[0], -1)

        mean = flat.mean(axis=1, keepdims=True)
        std = flat.std(axis=1, keepdims=True)
        flat_ok = std >= self.min_std
        safe_std = np.where(flat_ok, std, 1.0)
        return np.where(flat_ok, (flat - mean) / safe_std, 0.0)

    def transform(self, image: np.ndarray) -> np.ndarray:
        """Feature vector of a single (H, W) frame."""
        return self.transform_batch(image[None])[0]

    def window_mean(self, images: Sequence[np.ndarray]) -> np.ndarray:
        """Mean feature vector over a window of frames."""
        return self.transform_batch(np.stack(list(images))).mean(axis=0)

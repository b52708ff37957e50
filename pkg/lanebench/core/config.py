"""
Bench Configuration
===================

Centralized configuration management using Pydantic Settings.
Every physical constant and default threshold of the bench lives here and can
be overridden through ``LANEBENCH_``-prefixed environment variables.
"""

from functools import lru_cache
from typing import Optional

from pydantic_settings import BaseSettings, SettingsConfigDict


class Settings(BaseSettings):
    """
    Bench settings loaded from environment variables.
    """

    model_config = SettingsConfigDict(
        env_prefix="LANEBENCH_",
        env_file=".env",
        env_file_encoding="utf-8",
        case_sensitive=True,
        extra="ignore",
    )

    # Application
    APP_NAME: str = "lanebench"

    # Road geometry
    ARC_STEP: float = 0.5  # meters between centerline samples

    # Simulation timing (20 FPS camera, 500-frame runs)
    T_DELTA: float = 0.05
    DURATION_T: float = 25.0

    # Vehicle
    WHEELBASE: float = 2.6
    MAX_STEERING_DEG: float = 25.0

    # Camera
    IMAGE_WIDTH: int = 32
    IMAGE_HEIGHT: int = 32
    CAMERA_HEIGHT: float = 1.2
    CAMERA_PITCH: float = 0.3  # radians, tilted down
    CAMERA_FOV_DEG: float = 90.0
    VIEW_RANGE: float = 50.0
    MARKING_WIDTH: float = 0.15
    SKY_INTENSITY: float = 0.8
    GROUND_INTENSITY: float = 0.35

    # Weather effects
    RAIN_DENSITY: float = 0.04
    RAIN_STREAK_LENGTH: int = 3
    RAIN_LEVEL: float = 0.6
    SNOW_DENSITY: float = 0.05

    # Oracle and recorder
    LOOKAHEAD: float = 8.0
    PSEUDO_REAL_JITTER: float = 0.02

    # Scenario constraints
    SAMPLING_ATTEMPTS: int = 1000
    CURVE_SPEED_BASE: float = 15.0
    CURVE_SPEED_SLOPE: float = 250.0
    ROAD_MARGIN: float = 20.0

    # Matching and consistency
    EPSILON: float = 0.1
    CONSISTENCY_TOL: float = 0.1

    # Verdict thresholds
    MAE_THRESHOLD: float = 0.1
    MDCL_THRESHOLD: float = 0.7
    ALT_MAE_THRESHOLD: float = 0.05
    MDCL_CAP: float = 1.5
    ABORT_DEVIATION: float = 3.0

    # Learned controller
    HIDDEN_UNITS: int = 32
    WINDOW: int = 5

    # Logging
    LOG_LEVEL: str = "INFO"
    LOG_FILE: Optional[str] = None


@lru_cache()
def get_settings() -> Settings:
    """
    Get cached settings instance.
    Using lru_cache ensures settings are only loaded once.
    """
    return Settings()


# Global settings instance
settings = get_settings()

"""
Tests for settings, errors and logging setup.
"""

import json

import pytest
from loguru import logger

from lanebench.core.config import Settings, get_settings, settings
from lanebench.core.exceptions import (
    ConfigError,
    EndOfRoadError,
    LaneBenchError,
    MatchInputError,
    MetricInputError,
    MissingInputError,
    RestrictionError,
    SamplingExhaustedError,
    TrainingDivergenceError,
)
from lanebench.core.logging import setup_logging


def test_settings_defaults():
    assert settings.T_DELTA == 0.05
    assert settings.DURATION_T == 25.0
    assert settings.MAX_STEERING_DEG == 25.0
    assert settings.MDCL_CAP == 1.5
    assert settings.EPSILON == 0.1
    assert get_settings() is get_settings()


def test_settings_read_prefixed_environment(monkeypatch):
    monkeypatch.setenv("LANEBENCH_WHEELBASE", "3.1")
    monkeypatch.setenv("LANEBENCH_LOG_LEVEL", "DEBUG")
    fresh = Settings()
    assert fresh.WHEELBASE == 3.1
    assert fresh.LOG_LEVEL == "DEBUG"


def test_error_payload_is_machine_readable():
    err = MissingInputError("no scenarios", path="runs/x")
    payload = err.to_dict()
    assert payload == {
        "error": "missing_input",
        "message": "no scenarios",
        "exit_code": 3,
        "details": {"path": "runs/x"},
    }
    json.dumps(payload)


def test_exit_codes_are_distinct_per_failure_kind():
    codes = {
        cls.code: cls.exit_code
        for cls in (ConfigError, MissingInputError, SamplingExhaustedError, EndOfRoadError, TrainingDivergenceError)
    }
    assert len(set(codes.values())) == len(codes)
    assert all(code != 0 for code in codes.values())
    assert RestrictionError.exit_code == ConfigError.exit_code
    assert issubclass(RestrictionError, ConfigError)


def test_value_errors_stay_catchable_as_value_error():
    with pytest.raises(ValueError):
        raise MetricInputError("empty")
    with pytest.raises(ValueError):
        raise MatchInputError("too long")
    with pytest.raises(LaneBenchError):
        raise MatchInputError("too long")


def test_training_divergence_names_epoch():
    err = TrainingDivergenceError(7, float("nan"))
    assert err.epoch == 7
    assert "epoch 7" in err.message
    assert err.details["epoch"] == 7


def test_setup_logging_writes_file_sink(tmp_path):
    log_file = tmp_path / "bench.log"
    setup_logging("WARNING", str(log_file))
    logger.debug("debug line")
    logger.complete()
    setup_logging("INFO")
    assert "debug line" in log_file.read_text()

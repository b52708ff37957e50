"""
Bench Errors
============

Every failure the bench can report carries a stable code and the process
exit code the CLI returns for it.
"""

from typing import Any, Dict


class LaneBenchError(Exception):
    """Base class for all bench errors."""

    code = "lanebench_error"
    exit_code = 1

    def __init__(self, message: str, **details: Any):
        super().__init__(message)
        self.message = message
        self.details = details

    def to_dict(self) -> Dict[str, Any]:
        payload: Dict[str, Any] = {
            "error": self.code,
            "message": self.message,
            "exit_code": self.exit_code,
        }
        if self.details:
            payload["details"] = self.details
        return payload


class ConfigError(LaneBenchError):
    """Configuration file or flag could not be parsed or validated."""

    code = "config_error"
    exit_code = 2


class RestrictionError(ConfigError):
    """A domain-model override lies outside its parent model."""

    code = "restriction_error"


class MissingInputError(LaneBenchError):
    """A file or directory a command needs does not exist."""

    code = "missing_input"
    exit_code = 3


class SamplingExhaustedError(LaneBenchError):
    """Rejection sampling found no valid scenario within its attempt budget."""

    code = "sampling_exhausted"
    exit_code = 4


class EndOfRoadError(LaneBenchError):
    """A query point projects beyond the end of the road."""

    code = "end_of_road"
    exit_code = 5


class TrainingDivergenceError(LaneBenchError):
    """The training loss became non-finite, or the network saturated."""

    code = "training_diverged"
    exit_code = 6

    def __init__(self, epoch: int, loss: float, reason: str = "loss became non-finite"):
        super().__init__(f"training {reason} at epoch {epoch}", epoch=epoch, loss=str(loss))
        self.epoch = epoch


class MetricInputError(LaneBenchError, ValueError):
    """Metric inputs are empty or of mismatched length."""

    code = "metric_input"
    exit_code = 7


class MatchInputError(LaneBenchError, ValueError):
    """The simulated dataset is longer than the recording it is matched against."""

    code = "match_input"
    exit_code = 7


class ControllerError(LaneBenchError):
    """A controller was used without the inputs or binding it needs."""

    code = "controller_error"
    exit_code = 8


class ReportWriteError(LaneBenchError):
    """Report files could not be written."""

    code = "report_write"
    exit_code = 9

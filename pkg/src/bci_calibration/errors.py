"""Error codes and exceptions for the calibration toolkit."""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum
from typing import Any


class ErrorCode(Enum):
    """Toolkit error codes."""
    # Data errors (1xxx)
    MALFORMED_HEADER = 1001
    SAMPLE_COUNT_MISMATCH = 1002
    MARKER_OUT_OF_RANGE = 1003
    NON_MONOTONIC_MARKERS = 1004
    NO_USABLE_CUES = 1005
    INVALID_RECORDING = 1006
    MONTAGE_MISMATCH = 1007

    # DSP errors (2xxx)
    INVALID_BAND = 2001
    INVALID_FACTOR = 2002
    EPOCH_TOO_SHORT = 2003

    # Linear algebra errors (3xxx)
    TOO_FEW_SAMPLES = 3001
    ZERO_TRACE = 3002
    INVALID_SHRINKAGE = 3003
    NOT_POSITIVE_DEFINITE = 3004

    # Spatial filter errors (4xxx)
    SINGLE_CLASS = 4001
    TOO_MANY_COMPONENTS = 4002
    NON_FINITE_WEIGHTS = 4003
    ZERO_LABEL_VARIANCE = 4004
    EMPTY_FILTER_BANK = 4005
    INVALID_PARAMETER = 4006

    # Pipeline errors (5xxx)
    DEGENERATE_CLASSIFIER = 5001
    FEATURE_MISMATCH = 5002
    MODEL_FORMAT = 5003

    # Evaluation errors (6xxx)
    INSUFFICIENT_TRAIN_TRIALS = 6001
    LENGTH_MISMATCH = 6002
    INSUFFICIENT_DATA = 6003
    SESSION_MISMATCH = 6004

    # Synthesis errors (7xxx)
    INVALID_SYNTH_SPEC = 7001

    # System errors (9xxx)
    CONFIGURATION_ERROR = 9001
    INTERNAL_ERROR = 9002


@dataclass
class CalibrationError(Exception):
    """Base exception for calibration failures."""
    code: ErrorCode
    message: str
    details: dict[str, Any] = field(default_factory=dict)

    def __str__(self) -> str:
        if self.details:
            return f"[{self.code.name}] {self.message}: {self.details}"
        return f"[{self.code.name}] {self.message}"

    def tag(self, **tags: Any) -> "CalibrationError":
        """Attach context (stage, fold, session) without overwriting existing tags."""
        for key, value in tags.items():
            self.details.setdefault(key, value)
        return self


class RecordingFormatError(CalibrationError):
    """A recording or marker file does not parse."""


class ConfigError(CalibrationError):
    """Invalid configuration value; ``details["field"]`` names the field."""

    def __init__(self, field_name: str, message: str) -> None:
        super().__init__(ErrorCode.CONFIGURATION_ERROR, message, {"field": field_name})


def error_response(error: Exception) -> dict[str, Any]:
    """Standardized error payload for CLI diagnostics."""
    if isinstance(error, CalibrationError):
        return {
            "success": False,
            "error": error.message,
            "code": error.code.value,
            "details": error.details,
        }
    return {
        "success": False,
        "error": str(error),
        "code": ErrorCode.INTERNAL_ERROR.value,
        "details": None,
    }


def exit_code_for(error: Exception) -> int:
    """Exit code: 2 for configuration errors, 1 for runtime failures."""
    if isinstance(error, ConfigError):
        return 2
    if isinstance(error, CalibrationError) and error.code in (
        ErrorCode.CONFIGURATION_ERROR,
        ErrorCode.INVALID_SYNTH_SPEC,
    ):
        return 2
    return 1

"""Offline calibration and comparison of motor-imagery BCI pipelines."""

from .config import ConfigManager, PipelineConfig, RunConfig
from .core.tracing import configure_logging, stage
from .errors import CalibrationError, ConfigError, ErrorCode, RecordingFormatError
from .evaluation import EvalReport, cross_validate, plan_folds
from .pipeline import PipelineModel, load_model, predict, save_model, train_pipeline
from .spatial import SpatialMethod, SpatialModel

__version__ = "0.1.0"

__all__ = [
    "CalibrationError",
    "ConfigError",
    "ConfigManager",
    "ErrorCode",
    "EvalReport",
    "PipelineConfig",
    "PipelineModel",
    "RecordingFormatError",
    "RunConfig",
    "SpatialMethod",
    "SpatialModel",
    "__version__",
    "configure_logging",
    "cross_validate",
    "load_model",
    "plan_folds",
    "predict",
    "save_model",
    "stage",
    "train_pipeline",
]

"""Configuration management for calibration runs."""

from __future__ import annotations

import json
from dataclasses import asdict, dataclass, field, fields, replace
from pathlib import Path
from typing import Any, Union

from .errors import ConfigError

Gamma = Union[float, str]

METHODS = ("speccsp", "spoc", "fbcsp", "csp")
DEFAULT_METHODS = ("speccsp", "spoc", "fbcsp")


@dataclass(frozen=True)
class PipelineConfig:
    """Preprocessing, epoching and model hyperparameters of one pipeline."""
    # Preprocessing
    band_low_hz: float = 6.0
    band_high_hz: float = 32.0
    filter_order: int = 2
    decimation: int = 2

    # Epoching
    cue_label: str = "start"
    task_window_s: tuple[float, float] = (0.5, 3.5)
    rest_window_s: tuple[float, float] = (-2.5, -0.5)

    # Spatial filters
    n_pairs: int = 3
    spoc_components: int = 6
    speccsp_p: float = 0.0
    speccsp_q: float = 1.0
    speccsp_iterations: int = 3
    spectral_resolution_hz: float = 1.0
    bank_width_hz: float = 4.0
    normalize_trace: bool = True

    # Classifier
    lda_gamma: Gamma = "auto"

    def validate(self) -> "PipelineConfig":
        if not 0 < self.band_low_hz < self.band_high_hz:
            raise ConfigError("band_low_hz", "band must satisfy 0 < low < high")
        if self.filter_order < 1:
            raise ConfigError("filter_order", "filter_order must be >= 1")
        if self.decimation < 1:
            raise ConfigError("decimation", "decimation must be >= 1")
        for name in ("task_window_s", "rest_window_s"):
            lo, hi = getattr(self, name)
            if not lo < hi:
                raise ConfigError(name, f"{name} must satisfy start < end")
        if self.n_pairs < 1:
            raise ConfigError("n_pairs", "n_pairs must be >= 1")
        if self.spoc_components < 2 or self.spoc_components % 2:
            raise ConfigError("spoc_components", "spoc_components must be an even number >= 2")
        if self.speccsp_iterations < 1:
            raise ConfigError("speccsp_iterations", "speccsp_iterations must be >= 1")
        if self.spectral_resolution_hz <= 0:
            raise ConfigError("spectral_resolution_hz", "spectral_resolution_hz must be > 0")
        if self.bank_width_hz <= 0:
            raise ConfigError("bank_width_hz", "bank_width_hz must be > 0")
        if isinstance(self.lda_gamma, str):
            if self.lda_gamma != "auto":
                raise ConfigError("lda_gamma", "lda_gamma must be 'auto' or a number in [0, 1]")
        elif not 0.0 <= float(self.lda_gamma) <= 1.0:
            raise ConfigError("lda_gamma", "lda_gamma must be 'auto' or a number in [0, 1]")
        return self

    def to_dict(self) -> dict[str, Any]:
        data = asdict(self)
        data["task_window_s"] = list(self.task_window_s)
        data["rest_window_s"] = list(self.rest_window_s)
        return data

    @classmethod
    def from_dict(cls, data: dict[str, Any]) -> "PipelineConfig":
        known = {f.name for f in fields(cls)}
        values = {k: v for k, v in data.items() if k in known}
        for key in ("task_window_s", "rest_window_s"):
            if key in values:
                values[key] = tuple(float(x) for x in values[key])
        return cls(**values).validate()


@dataclass
class RunConfig:
    """Flat run configuration for the command-line front end."""
    # Inputs / outputs
    data: list[str] = field(default_factory=list)
    out: str = "output"
    methods: list[str] = field(default_factory=lambda: list(DEFAULT_METHODS))

    # Pipeline (flattened PipelineConfig)
    band_low_hz: float = 6.0
    band_high_hz: float = 32.0
    filter_order: int = 2
    decimation: int = 2
    cue_label: str = "start"
    task_window_s: list[float] = field(default_factory=lambda: [0.5, 3.5])
    rest_window_s: list[float] = field(default_factory=lambda: [-2.5, -0.5])
    n_pairs: int = 3
    spoc_components: int = 6
    speccsp_p: float = 0.0
    speccsp_q: float = 1.0
    speccsp_iterations: int = 3
    spectral_resolution_hz: float = 1.0
    bank_width_hz: float = 4.0
    normalize_trace: bool = True
    lda_gamma: Gamma = "auto"

    # Evaluation
    folds: int = 10
    margin: int = 5
    stat_unit: str = "session"
    seed: int = 42
    jobs: int = 1

    # Synthesis
    sessions: int = 14
    subjects: int = 7
    n_trials: int = 40
    modulation: float = 0.8
    snr_db: float = 5.0
    format: str = "csv"

    def pipeline(self) -> PipelineConfig:
        """The PipelineConfig embedded in this run configuration."""
        return PipelineConfig.from_dict(asdict(self))

    def validate(self) -> "RunConfig":
        self.pipeline()
        unknown = [m for m in self.methods if m not in METHODS]
        if unknown or not self.methods:
            raise ConfigError("methods", f"unknown or empty method list: {self.methods}")
        if self.folds < 2:
            raise ConfigError("folds", "folds must be >= 2")
        if self.margin < 0:
            raise ConfigError("margin", "margin must be >= 0")
        if self.stat_unit not in ("session", "subject"):
            raise ConfigError("stat_unit", "stat_unit must be 'session' or 'subject'")
        if self.jobs < 1:
            raise ConfigError("jobs", "jobs must be >= 1")
        if self.sessions < 1:
            raise ConfigError("sessions", "sessions must be >= 1")
        if self.subjects < 1:
            raise ConfigError("subjects", "subjects must be >= 1")
        if self.n_trials < 2:
            raise ConfigError("n_trials", "n_trials must be >= 2")
        if not 0.0 <= self.modulation <= 1.0:
            raise ConfigError("modulation", "modulation must lie in [0, 1]")
        if self.format not in ("csv", "bin"):
            raise ConfigError("format", "format must be 'csv' or 'bin'")
        return self

    def to_dict(self) -> dict[str, Any]:
        return asdict(self)


class ConfigManager:
    """Loads a flat JSON config file and applies command-line overrides."""

    def __init__(self, config_path: str | None = None) -> None:
        self._config = RunConfig()
        self._config_path = config_path

    def load(self) -> RunConfig:
        """Load configuration from file."""
        if self._config_path:
            path = Path(self._config_path)
            if not path.exists():
                raise ConfigError("config", f"config file not found: {path}")
            try:
                data = json.loads(path.read_text(encoding="utf-8"))
            except json.JSONDecodeError as exc:
                raise ConfigError("config", f"invalid JSON in {path}: {exc}") from exc
            if not isinstance(data, dict):
                raise ConfigError("config", "config file must hold a flat JSON object")
            self.update(**data)
        return self._config

    def save(self, path: str | Path) -> Path:
        """Write the effective configuration as flat JSON."""
        target = Path(path)
        target.parent.mkdir(parents=True, exist_ok=True)
        target.write_text(
            json.dumps(self._config.to_dict(), ensure_ascii=False, indent=2, sort_keys=True) + "\n",
            encoding="utf-8",
        )
        return target

    def get(self) -> RunConfig:
        """Get current configuration."""
        return self._config

    def update(self, **kwargs: Any) -> RunConfig:
        """Update configuration values; ``None`` means "not given" and is skipped."""
        known = {f.name for f in fields(RunConfig)}
        changes = {}
        for key, value in kwargs.items():
            if key not in known:
                raise ConfigError(key, f"unknown configuration key: {key}")
            if value is not None:
                changes[key] = value
        self._config = replace(self._config, **changes)
        return self._config

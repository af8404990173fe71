"""Synthetic session specification."""

from __future__ import annotations

import json
from dataclasses import asdict, dataclass, fields, replace
from pathlib import Path
from typing import Any, Optional

import numpy as np
from typing_extensions import Self

from ..errors import CalibrationError, ErrorCode

MONTAGE_10_20 = ("FC3", "FCz", "FC4", "C5", "C3", "C1", "Cz", "C2", "C4", "C6", "CPz")


def _invalid(field_name: str, message: str) -> CalibrationError:
    return CalibrationError(ErrorCode.INVALID_SYNTH_SPEC, message, {"field": field_name})


@dataclass(frozen=True)
class SourceSpec:
    """Band-limited oscillatory source; ``modulation`` is the task ERD depth."""
    center_hz: float = 11.0
    bandwidth_hz: float = 2.0
    modulation: float = 0.8

    @property
    def band_hz(self) -> tuple[float, float]:
        return self.center_hz - self.bandwidth_hz / 2.0, self.center_hz + self.bandwidth_hz / 2.0


@dataclass(frozen=True)
class SynthSpec:
    """Forward model of one calibration session.

    Sensors = mixing @ sources + pink noise. ``mixing`` is [channel x source];
    when None it is drawn from ``mixing_seed`` with condition number <= 5.
    ``snr_db`` of None generates noiseless data.
    """
    channel_labels: tuple[str, ...] = MONTAGE_10_20
    sources: tuple[SourceSpec, ...] = (SourceSpec(),)
    mixing: Optional[tuple[tuple[float, ...], ...]] = None
    mixing_seed: int = 0
    snr_db: Optional[float] = 5.0
    source_amplitude_uv: float = 10.0
    n_trials: int = 40
    lead_in_s: float = 4.0
    task_s: float = 4.0
    iti_s: float = 4.0
    fs_hz: float = 256.0
    seed: int = 42
    amplitude_jitter: float = 0.1
    spike_rate_hz: float = 0.0
    spike_amplitude_uv: float = 200.0

    @property
    def n_channels(self) -> int:
        return len(self.channel_labels)

    @property
    def n_sources(self) -> int:
        return len(self.sources)

    def validate(self) -> Self:
        if self.n_channels < 1 or len(set(self.channel_labels)) != self.n_channels:
            raise _invalid("channel_labels", "channel labels must be non-empty and unique")
        if not self.sources:
            raise _invalid("sources", "at least one source is required")
        for source in self.sources:
            if not 0.0 <= source.modulation <= 1.0:
                raise _invalid("modulation", f"modulation must lie in [0, 1], got {source.modulation}")
            if source.bandwidth_hz <= 0 or source.band_hz[0] <= 0:
                raise _invalid("sources", "source band must be positive")
            if not self.fs_hz > 2.0 * (source.center_hz + source.bandwidth_hz):
                raise _invalid("fs_hz", "fs_hz must exceed 2 * (center + bandwidth) of every source")
        if self.mixing is not None:
            shape = np.asarray(self.mixing, dtype=np.float64).shape
            if shape != (self.n_channels, self.n_sources):
                raise _invalid("mixing", f"mixing must be [channel x source] = {(self.n_channels, self.n_sources)}")
        if self.n_trials < 1:
            raise _invalid("n_trials", "n_trials must be >= 1")
        for name in ("lead_in_s", "task_s", "iti_s", "fs_hz", "source_amplitude_uv"):
            if not getattr(self, name) > 0:
                raise _invalid(name, f"{name} must be > 0")
        if self.amplitude_jitter < 0:
            raise _invalid("amplitude_jitter", "amplitude_jitter must be >= 0")
        if self.spike_rate_hz < 0:
            raise _invalid("spike_rate_hz", "spike_rate_hz must be >= 0")
        return self

    def with_modulation(self, modulation: float) -> Self:
        return replace(self, sources=tuple(replace(s, modulation=modulation) for s in self.sources))

    def to_dict(self) -> dict[str, Any]:
        data = asdict(self)
        data["channel_labels"] = list(self.channel_labels)
        data["sources"] = [asdict(s) for s in self.sources]
        data["mixing"] = None if self.mixing is None else [list(row) for row in self.mixing]
        return data

    @classmethod
    def from_dict(cls, data: dict[str, Any]) -> Self:
        known = {f.name for f in fields(cls)}
        values = {k: v for k, v in data.items() if k in known}
        if "channel_labels" in values:
            values["channel_labels"] = tuple(values["channel_labels"])
        if "sources" in values:
            values["sources"] = tuple(SourceSpec(**s) for s in values["sources"])
        if values.get("mixing") is not None:
            values["mixing"] = tuple(tuple(float(x) for x in row) for row in values["mixing"])
        try:
            spec = cls(**values)
        except TypeError as exc:
            raise _invalid("spec", f"invalid synth spec: {exc}") from exc
        return spec.validate()

    def save(self, path: str | Path) -> Path:
        target = Path(path)
        target.parent.mkdir(parents=True, exist_ok=True)
        target.write_text(json.dumps(self.to_dict(), indent=2, sort_keys=True) + "\n", encoding="utf-8")
        return target

    @classmethod
    def load(cls, path: str | Path) -> Self:
        return cls.from_dict(json.loads(Path(path).read_text(encoding="utf-8")))

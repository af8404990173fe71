"""Spatial filter models shared by the CSP family and SPoC."""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum
from typing import Any, Optional

import numpy as np
from typing_extensions import Self

from ..data.recording import EpochSet
from ..dsp.filters import IirFilter, design_butterworth_bandpass, filter_forward
from ..dsp.spectra import spectral_filter
from ..errors import CalibrationError, ErrorCode


class SpatialMethod(str, Enum):
    """Spatial filter training methods."""
    CSP = "csp"
    FBCSP = "fbcsp"
    SPECCSP = "speccsp"
    SPOC = "spoc"


def patterns_from_filters(w: np.ndarray, c: np.ndarray) -> np.ndarray:
    """A = C W (W^T C W)^-1."""
    return c @ w @ np.linalg.pinv(w.T @ c @ w)


def apply_sign_convention(w: np.ndarray, a: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Flip each component so its largest-magnitude pattern coefficient is positive."""
    peaks = a[np.argmax(np.abs(a), axis=0), np.arange(a.shape[1])]
    signs = np.where(peaks < 0, -1.0, 1.0)
    return w * signs, a * signs


@dataclass(frozen=True, eq=False)
class BandFilters:
    """Filters of one frequency band.

    ``band_hz`` is None when the band is the preprocessed broadband signal.
    SpecCSP bands also carry per-component spectral weights
    [component x frequency] sampled at ``frequencies_hz``.
    """
    band_hz: Optional[tuple[float, float]]
    filters: np.ndarray
    patterns: np.ndarray
    eigenvalues: np.ndarray
    filter_order: int = 2
    spectral_weights: Optional[np.ndarray] = None
    frequencies_hz: Optional[np.ndarray] = None

    def __post_init__(self) -> None:
        if self.filters.shape != self.patterns.shape:
            raise CalibrationError(
                ErrorCode.FEATURE_MISMATCH,
                "filters and patterns must have matching shapes",
                {"filters": self.filters.shape, "patterns": self.patterns.shape},
            )
        if self.eigenvalues.shape != (self.filters.shape[1],):
            raise CalibrationError(ErrorCode.FEATURE_MISMATCH, "one eigenvalue per component required")
        if self.spectral_weights is not None and self.spectral_weights.shape[0] != self.filters.shape[1]:
            raise CalibrationError(ErrorCode.FEATURE_MISMATCH, "one spectral weight vector per component required")

    @property
    def n_components(self) -> int:
        return self.filters.shape[1]

    def band_filter(self, fs_hz: float) -> Optional[IirFilter]:
        if self.band_hz is None:
            return None
        return design_butterworth_bandpass(self.filter_order, self.band_hz[0], self.band_hz[1], fs_hz)

    def to_dict(self) -> dict[str, Any]:
        data: dict[str, Any] = {
            "band_hz": None if self.band_hz is None else list(self.band_hz),
            "filter_order": self.filter_order,
            "filters": self.filters.tolist(),
            "patterns": self.patterns.tolist(),
            "eigenvalues": self.eigenvalues.tolist(),
        }
        if self.spectral_weights is not None:
            data["spectral_weights"] = self.spectral_weights.tolist()
            data["frequencies_hz"] = self.frequencies_hz.tolist()
        return data

    @classmethod
    def from_dict(cls, data: dict[str, Any]) -> Self:
        weights = data.get("spectral_weights")
        return cls(
            band_hz=None if data.get("band_hz") is None else tuple(data["band_hz"]),
            filters=np.asarray(data["filters"], dtype=np.float64),
            patterns=np.asarray(data["patterns"], dtype=np.float64),
            eigenvalues=np.asarray(data["eigenvalues"], dtype=np.float64),
            filter_order=int(data.get("filter_order", 2)),
            spectral_weights=None if weights is None else np.asarray(weights, dtype=np.float64),
            frequencies_hz=None if weights is None else np.asarray(data["frequencies_hz"], dtype=np.float64),
        )


@dataclass(frozen=True, eq=False)
class SpatialModel:
    """Learned spatial filters, one entry per band, in band order."""
    method: SpatialMethod
    bands: tuple[BandFilters, ...]
    n_pairs: int
    channel_labels: tuple[str, ...]
    sample_rate_hz: float
    metadata: dict[str, Any] = field(default_factory=dict)

    @property
    def n_channels(self) -> int:
        return len(self.channel_labels)

    @property
    def n_components(self) -> int:
        """Total feature dimension over all bands."""
        return sum(band.n_components for band in self.bands)

    @property
    def spectral_weights(self) -> Optional[np.ndarray]:
        weights = [b.spectral_weights for b in self.bands if b.spectral_weights is not None]
        return np.vstack(weights) if weights else None

    def component_signals(self, epochs: EpochSet) -> list[np.ndarray]:
        """Per band, component time courses [trial x component x sample]."""
        if epochs.n_channels != self.n_channels:
            raise CalibrationError(
                ErrorCode.FEATURE_MISMATCH,
                "epoch channel count does not match the spatial filters",
                {"epochs": epochs.n_channels, "filters": self.n_channels},
            )
        signals = []
        for band in self.bands:
            data = epochs.data
            iir = band.band_filter(epochs.sample_rate_hz)
            if iir is not None:
                data = filter_forward(iir, data)
            components = np.einsum("ck,tcs->tks", band.filters, data)
            if band.spectral_weights is not None:
                components = np.stack(
                    [
                        spectral_filter(components[:, k, :], np.sqrt(band.spectral_weights[k]),
                                        band.frequencies_hz, epochs.sample_rate_hz)
                        for k in range(band.n_components)
                    ],
                    axis=1,
                )
            signals.append(components)
        return signals

    def to_dict(self) -> dict[str, Any]:
        return {
            "method": self.method.value,
            "n_pairs": self.n_pairs,
            "channel_labels": list(self.channel_labels),
            "sample_rate_hz": self.sample_rate_hz,
            "metadata": self.metadata,
            "bands": [band.to_dict() for band in self.bands],
        }

    @classmethod
    def from_dict(cls, data: dict[str, Any]) -> Self:
        try:
            return cls(
                method=SpatialMethod(data["method"]),
                bands=tuple(BandFilters.from_dict(b) for b in data["bands"]),
                n_pairs=int(data["n_pairs"]),
                channel_labels=tuple(data["channel_labels"]),
                sample_rate_hz=float(data["sample_rate_hz"]),
                metadata=dict(data.get("metadata", {})),
            )
        except (KeyError, TypeError, ValueError) as exc:
            raise CalibrationError(ErrorCode.MODEL_FORMAT, f"invalid spatial model document: {exc}") from exc

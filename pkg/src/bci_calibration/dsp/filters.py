"""Butterworth IIR design, causal filtering, decimation and filter banks."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional, TypeVar, Union

import numpy as np
from loguru import logger
from scipy import signal

from ..data.recording import EpochSet, Marker, Recording
from ..errors import CalibrationError, ErrorCode

STABILITY_MARGIN = 1e-6
ANTI_ALIAS_ORDER = 8
ANTI_ALIAS_FRACTION = 0.8
MIN_BAND_WIDTH_HZ = 1.0

Signal = TypeVar("Signal", Recording, EpochSet, np.ndarray)


@dataclass(frozen=True, eq=False)
class IirFilter:
    """Transfer-function IIR filter, ``a[0] == 1``.

    ``sos`` is set for high-order designs (anti-alias lowpass) and is used in
    place of ``b``/``a`` when filtering.
    """
    b: np.ndarray
    a: np.ndarray
    order: int
    band_hz: tuple[float, float]
    fs_hz: float
    btype: str = "bandpass"
    sos: Optional[np.ndarray] = None

    def poles(self) -> np.ndarray:
        if self.sos is not None:
            return np.concatenate([np.roots(section[3:]) for section in self.sos])
        return np.roots(self.a)

    def max_pole_radius(self) -> float:
        poles = self.poles()
        return float(np.max(np.abs(poles))) if poles.size else 0.0

    def is_stable(self) -> bool:
        return self.max_pole_radius() < 1.0 - STABILITY_MARGIN

    def frequency_response(self, freqs_hz: Union[float, np.ndarray]) -> np.ndarray:
        """Complex response H(e^{jw}) at the given frequencies."""
        freqs = np.atleast_1d(np.asarray(freqs_hz, dtype=np.float64))
        if self.sos is not None:
            _, h = signal.sosfreqz(self.sos, worN=freqs, fs=self.fs_hz)
        else:
            _, h = signal.freqz(self.b, self.a, worN=freqs, fs=self.fs_hz)
        return h

    def gain_db(self, freqs_hz: Union[float, np.ndarray]) -> np.ndarray:
        with np.errstate(divide="ignore"):
            return 20.0 * np.log10(np.abs(self.frequency_response(freqs_hz)))

    def to_dict(self) -> dict:
        return {
            "btype": self.btype,
            "order": self.order,
            "band_hz": list(self.band_hz),
            "fs_hz": self.fs_hz,
        }


def design_butterworth_bandpass(order: int, low_hz: float, high_hz: float, fs_hz: float) -> IirFilter:
    """Butterworth bandpass by bilinear transform with prewarped band edges.

    ``order`` is the prototype order; band edges are the -3 dB points.
    """
    if order < 1:
        raise CalibrationError(ErrorCode.INVALID_BAND, "filter order must be >= 1", {"order": order})
    if not 0 < low_hz < high_hz < fs_hz / 2:
        raise CalibrationError(
            ErrorCode.INVALID_BAND,
            "band edges must satisfy 0 < low < high < fs/2",
            {"low_hz": low_hz, "high_hz": high_hz, "fs_hz": fs_hz},
        )
    b, a = signal.butter(order, [low_hz, high_hz], btype="bandpass", fs=fs_hz)
    f = IirFilter(b=b / a[0], a=a / a[0], order=order, band_hz=(float(low_hz), float(high_hz)), fs_hz=float(fs_hz))
    _require_stable(f)
    return f


def design_butterworth_lowpass(order: int, cutoff_hz: float, fs_hz: float) -> IirFilter:
    """Butterworth lowpass in second-order sections."""
    if order < 1 or not 0 < cutoff_hz < fs_hz / 2:
        raise CalibrationError(
            ErrorCode.INVALID_BAND,
            "lowpass cutoff must satisfy 0 < cutoff < fs/2",
            {"order": order, "cutoff_hz": cutoff_hz, "fs_hz": fs_hz},
        )
    sos = signal.butter(order, cutoff_hz, btype="lowpass", fs=fs_hz, output="sos")
    b, a = signal.sos2tf(sos)
    f = IirFilter(
        b=b / a[0], a=a / a[0], order=order, band_hz=(0.0, float(cutoff_hz)),
        fs_hz=float(fs_hz), btype="lowpass", sos=sos,
    )
    _require_stable(f)
    return f


def _require_stable(f: IirFilter) -> None:
    if not f.is_stable():
        raise CalibrationError(
            ErrorCode.INVALID_BAND,
            "designed filter is unstable",
            {"band_hz": f.band_hz, "max_pole_radius": f.max_pole_radius()},
        )


def _apply(f: IirFilter, x: np.ndarray) -> np.ndarray:
    if f.sos is not None:
        return signal.sosfilt(f.sos, x, axis=-1)
    return signal.lfilter(f.b, f.a, x, axis=-1)


def filter_forward(f: IirFilter, x: Signal) -> Signal:
    """Causal filtering along time with zero initial state, per channel (and trial)."""
    if isinstance(x, Recording):
        return x.with_samples(_apply(f, x.samples))
    if isinstance(x, EpochSet):
        return x.with_data(_apply(f, x.data))
    if isinstance(x, np.ndarray):
        return _apply(f, x)
    raise TypeError(f"cannot filter {type(x).__name__}")


def decimate(rec: Recording, factor: int) -> Recording:
    """Anti-alias lowpass then keep every ``factor``-th sample."""
    if factor <= 0:
        raise CalibrationError(ErrorCode.INVALID_FACTOR, "decimation factor must be >= 1", {"factor": factor})
    if factor == 1:
        return rec
    new_fs = rec.sample_rate_hz / factor
    lowpass = design_butterworth_lowpass(ANTI_ALIAS_ORDER, ANTI_ALIAS_FRACTION * new_fs / 2, rec.sample_rate_hz)
    n_out = rec.n_samples // factor
    smoothed = _apply(lowpass, rec.samples)
    samples = smoothed[:, ::factor][:, :n_out]
    markers = []
    for marker in rec.markers:
        index = marker.sample_index // factor
        if index < n_out:
            markers.append(Marker(sample_index=index, label=marker.label))
        else:
            logger.warning("marker '{}' at {} falls past the decimated end; dropped", marker.label, marker.sample_index)
    return rec.with_samples(samples, sample_rate_hz=new_fs, markers=markers)


def make_filter_bank(
    low_hz: float = 6.0,
    high_hz: float = 32.0,
    width_hz: float = 4.0,
    fs_hz: float = 128.0,
    order: int = 2,
) -> list[IirFilter]:
    """Contiguous bands of ``width_hz`` tiling [low, high]; a final band
    narrower than 1 Hz is merged into its predecessor."""
    if width_hz <= 0:
        raise CalibrationError(ErrorCode.INVALID_BAND, "band width must be > 0", {"width_hz": width_hz})
    if not low_hz < high_hz:
        raise CalibrationError(ErrorCode.INVALID_BAND, "filter bank needs low < high", {"low_hz": low_hz, "high_hz": high_hz})
    n_bands = max(1, math.ceil((high_hz - low_hz) / width_hz - 1e-9))
    edges = [low_hz + i * width_hz for i in range(n_bands)] + [high_hz]
    if len(edges) > 2 and edges[-1] - edges[-2] < MIN_BAND_WIDTH_HZ:
        del edges[-2]
    return [design_butterworth_bandpass(order, lo, hi, fs_hz) for lo, hi in zip(edges[:-1], edges[1:])]


def preprocess(rec: Recording, band_hz: tuple[float, float], order: int, factor: int) -> Recording:
    """Bandpass the continuous recording, then decimate."""
    bandpass = design_butterworth_bandpass(order, band_hz[0], band_hz[1], rec.sample_rate_hz)
    return decimate(filter_forward(bandpass, rec), factor)

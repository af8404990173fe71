"""Class-averaged cross-spectral matrices from Hann-windowed short-time FFTs."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy import signal

from ..data.recording import REST, TASK, EpochSet
from ..errors import CalibrationError, ErrorCode


@dataclass(frozen=True, eq=False)
class CrossSpectrumSet:
    """Per class c and frequency bin w, the Hermitian matrix V_c(w).

    ``spectra[c]`` has shape [frequency x channel x channel].
    """
    frequencies_hz: np.ndarray
    spectra: dict[int, np.ndarray]
    n_trials: dict[int, int] = field(default_factory=dict)

    def real_part(self, label: int) -> np.ndarray:
        """Re V_c(w), the real-symmetric pencil input for spatial solvers."""
        return np.ascontiguousarray(self.spectra[label].real)

    def weighted_covariance(self, label: int, weights: np.ndarray) -> np.ndarray:
        """sum_w weights(w) * Re V_c(w)."""
        return np.einsum("f,fcd->cd", np.asarray(weights, dtype=np.float64), self.real_part(label))

    def component_spectrum(self, label: int, w: np.ndarray) -> np.ndarray:
        """s_c(w) = w^T Re V_c(w) w for a single spatial filter."""
        return np.einsum("c,fcd,d->f", w, self.real_part(label), w)


def window_length(fs_hz: float, resolution_hz: float) -> int:
    return int(round(fs_hz / resolution_hz))


def cross_spectra(
    epochs: EpochSet,
    resolution_hz: float = 1.0,
    band_hz: tuple[float, float] = (6.0, 32.0),
) -> CrossSpectrumSet:
    """Welch-style class-average of X(w) X(w)^H over windows and trials.

    Windows are Hann, ``fs / resolution_hz`` samples long, 50% overlap;
    bins outside ``band_hz`` are dropped.
    """
    nperseg = window_length(epochs.sample_rate_hz, resolution_hz)
    if epochs.n_samples < nperseg:
        raise CalibrationError(
            ErrorCode.EPOCH_TOO_SHORT,
            "epoch shorter than one spectral window",
            {"n_samples": epochs.n_samples, "window": nperseg},
        )
    freqs = np.fft.rfftfreq(nperseg, d=1.0 / epochs.sample_rate_hz)
    keep = (freqs >= band_hz[0] - 1e-9) & (freqs <= band_hz[1] + 1e-9)
    n_channels = epochs.n_channels

    spectra: dict[int, np.ndarray] = {}
    counts: dict[int, int] = {}
    for label in (REST, TASK):
        trials = epochs.data[epochs.labels == label]
        counts[label] = trials.shape[0]
        if trials.shape[0] == 0:
            spectra[label] = np.zeros((int(keep.sum()), n_channels, n_channels), dtype=np.complex128)
            continue
        _, _, z = signal.stft(
            trials,
            fs=epochs.sample_rate_hz,
            window="hann",
            nperseg=nperseg,
            noverlap=nperseg // 2,
            boundary=None,
            padded=False,
            axis=-1,
        )
        z = z[:, :, keep, :]  # [trial, channel, freq, segment]
        v = np.einsum("ncfs,ndfs->fcd", z, np.conj(z)) / (z.shape[0] * z.shape[3])
        spectra[label] = 0.5 * (v + np.conj(np.transpose(v, (0, 2, 1))))
    return CrossSpectrumSet(frequencies_hz=freqs[keep], spectra=spectra, n_trials=counts)


def spectral_filter(
    x: np.ndarray,
    weights: np.ndarray,
    weight_freqs_hz: np.ndarray,
    fs_hz: float,
) -> np.ndarray:
    """Scale the spectrum of ``x`` (time on the last axis) by ``weights``.

    Weights are interpolated linearly onto the FFT bins of ``x`` and are zero
    outside ``weight_freqs_hz``.
    """
    n = x.shape[-1]
    freqs = np.fft.rfftfreq(n, d=1.0 / fs_hz)
    gain = np.interp(freqs, weight_freqs_hz, weights, left=0.0, right=0.0)
    return np.fft.irfft(np.fft.rfft(x, axis=-1) * gain, n=n, axis=-1)

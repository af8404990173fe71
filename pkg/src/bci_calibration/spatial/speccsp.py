"""Spectrally weighted CSP by alternating spatial and spectral updates."""

from __future__ import annotations

import numpy as np
from loguru import logger

from ..data.recording import REST, TASK, EpochSet
from ..dsp.spectra import CrossSpectrumSet, cross_spectra
from ..errors import CalibrationError, ErrorCode
from ..linalg import generalized_eig_sym
from .csp import require_both_classes, require_components
from .model import BandFilters, SpatialMethod, SpatialModel, apply_sign_convention, patterns_from_filters


def _normalize_rows(x: np.ndarray) -> np.ndarray:
    return x / x.sum(axis=-1, keepdims=True)


def spectral_update(
    spectra: CrossSpectrumSet,
    w: np.ndarray,
    target: int,
    p: float,
    q: float,
) -> np.ndarray:
    """Per-component weights beta(w) ~ s+^p (s+/s-)^q, each row summing to 1.

    ``target`` is the class whose power the components maximise.
    """
    other = REST if target == TASK else TASK
    s_plus = np.maximum(np.einsum("ck,fcd,dk->kf", w, spectra.real_part(target), w), 0.0)
    s_minus = np.maximum(np.einsum("ck,fcd,dk->kf", w, spectra.real_part(other), w), 0.0)
    with np.errstate(divide="ignore", invalid="ignore"):
        raw = s_plus ** p * (s_plus / s_minus) ** q
        weights = _normalize_rows(raw)
    if not np.all(np.isfinite(weights)):
        raise CalibrationError(
            ErrorCode.NON_FINITE_WEIGHTS,
            "spectral weights are not finite (zero band power)",
            {"target": target, "p": p, "q": q},
        )
    return weights


def train_speccsp(
    epochs: EpochSet,
    n_pairs: int = 3,
    p: float = 0.0,
    q: float = 1.0,
    n_iterations: int = 3,
    resolution_hz: float = 1.0,
    band_hz: tuple[float, float] = (6.0, 32.0),
) -> SpatialModel:
    """Alternate CSP on beta-weighted cross-spectra with a spectral weight update.

    Each end of the eigen-spectrum keeps its own beta: the task end maximises
    task power, the rest end maximises rest power. Weights start uniform on
    ``band_hz``; every component stores the beta of the final update.
    """
    require_both_classes(epochs)
    require_components(n_pairs, epochs.n_channels)
    if n_iterations < 1:
        raise CalibrationError(ErrorCode.INVALID_PARAMETER, "n_iterations must be >= 1", {"n_iterations": n_iterations})
    spectra = cross_spectra(epochs, resolution_hz, band_hz)
    n_freqs = spectra.frequencies_hz.shape[0]
    if n_freqs == 0:
        raise CalibrationError(ErrorCode.INVALID_BAND, "no spectral bins inside the band", {"band_hz": band_hz})

    beta = {TASK: np.full(n_freqs, 1.0 / n_freqs), REST: np.full(n_freqs, 1.0 / n_freqs)}
    component_beta: dict[int, np.ndarray] = {}
    ends: dict[int, tuple[np.ndarray, np.ndarray, np.ndarray]] = {}
    for iteration in range(n_iterations):
        for target in (TASK, REST):
            c_task = spectra.weighted_covariance(TASK, beta[target])
            c_rest = spectra.weighted_covariance(REST, beta[target])
            composite = c_task + c_rest
            basis = generalized_eig_sym(c_task, composite)
            if target == TASK:
                cols = slice(0, n_pairs)
            else:
                cols = slice(basis.eigenvalues.shape[0] - n_pairs, None)
            ends[target] = (basis.eigenvectors[:, cols], basis.eigenvalues[cols], composite)
        for target in (TASK, REST):
            component_beta[target] = spectral_update(spectra, ends[target][0], target, p, q)
            beta[target] = _normalize_rows(component_beta[target].mean(axis=0))
        logger.debug("speccsp iteration {}: eigenvalues task-end {} rest-end {}",
                     iteration + 1, np.round(ends[TASK][1], 4), np.round(ends[REST][1], 4))

    filters, patterns = [], []
    for target in (TASK, REST):
        w, _, composite = ends[target]
        w, a = apply_sign_convention(w, patterns_from_filters(w, 0.5 * composite))
        filters.append(w)
        patterns.append(a)

    band = BandFilters(
        band_hz=None,
        filters=np.hstack(filters),
        patterns=np.hstack(patterns),
        eigenvalues=np.concatenate([ends[TASK][1], ends[REST][1]]),
        spectral_weights=np.vstack([component_beta[TASK], component_beta[REST]]),
        frequencies_hz=spectra.frequencies_hz,
    )
    return SpatialModel(
        method=SpatialMethod.SPECCSP,
        bands=(band,),
        n_pairs=n_pairs,
        channel_labels=epochs.channel_labels,
        sample_rate_hz=epochs.sample_rate_hz,
        metadata={"p": p, "q": q, "n_iterations": n_iterations, "resolution_hz": resolution_hz,
                  "band_hz": list(band_hz)},
    )

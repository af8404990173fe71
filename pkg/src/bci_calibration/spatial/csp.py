"""Common spatial patterns."""

from __future__ import annotations

from typing import Optional

import numpy as np

from ..data.recording import REST, TASK, EpochSet
from ..errors import CalibrationError, ErrorCode
from ..linalg import covariance, generalized_eig_sym
from .model import BandFilters, SpatialMethod, SpatialModel, apply_sign_convention, patterns_from_filters


def require_both_classes(epochs: EpochSet) -> None:
    if not epochs.has_both_classes():
        raise CalibrationError(ErrorCode.SINGLE_CLASS, "training needs both task and rest trials", epochs.class_counts())


def require_components(n_per_end: int, n_channels: int, name: str = "n_pairs") -> None:
    if n_per_end < 1 or 2 * n_per_end > n_channels:
        raise CalibrationError(
            ErrorCode.TOO_MANY_COMPONENTS,
            f"{name} must lie in [1, channels/2]",
            {name: n_per_end, "channels": n_channels},
        )


def trial_covariances(epochs: EpochSet, normalize_trace: bool = True) -> np.ndarray:
    """Per-trial covariance matrices [trial x channel x channel].

    With ``normalize_trace`` every trial is divided by one shared factor so
    the mean trace equals the channel count. Relative power between trials
    is kept, which SPoC and the class contrast rely on.
    """
    covs = np.stack([covariance(trial, normalize_trace=False).matrix for trial in epochs.data])
    if not normalize_trace:
        return covs
    mean_trace = float(np.trace(covs, axis1=1, axis2=2).mean())
    if mean_trace <= 0.0:
        raise CalibrationError(ErrorCode.ZERO_TRACE, "zero trace", {"channels": epochs.n_channels})
    return covs * (epochs.n_channels / mean_trace)


def class_covariances(epochs: EpochSet, normalize_trace: bool = True) -> dict[int, np.ndarray]:
    """Trial-averaged covariance per class."""
    covs = trial_covariances(epochs, normalize_trace)
    return {label: covs[epochs.labels == label].mean(axis=0) for label in (REST, TASK)}


def csp_band(
    epochs: EpochSet,
    n_pairs: int,
    normalize_trace: bool = True,
    band_hz: Optional[tuple[float, float]] = None,
    filter_order: int = 2,
) -> BandFilters:
    """CSP filters of one band from already band-limited epochs."""
    require_both_classes(epochs)
    require_components(n_pairs, epochs.n_channels)
    covs = class_covariances(epochs, normalize_trace)
    composite = covs[TASK] + covs[REST]
    basis = generalized_eig_sym(covs[TASK], composite)
    w, eigenvalues = basis.ends(n_pairs)
    w, a = apply_sign_convention(w, patterns_from_filters(w, 0.5 * composite))
    return BandFilters(
        band_hz=band_hz,
        filters=w,
        patterns=a,
        eigenvalues=eigenvalues,
        filter_order=filter_order,
    )


def train_csp(epochs: EpochSet, n_pairs: int = 3, normalize_trace: bool = True) -> SpatialModel:
    """Broadband CSP on the pencil (C_task, C_task + C_rest).

    Keeps the ``n_pairs`` largest and ``n_pairs`` smallest eigenvalue
    components; eigenvalues lie in [0, 1].
    """
    band = csp_band(epochs, n_pairs, normalize_trace)
    return SpatialModel(
        method=SpatialMethod.CSP,
        bands=(band,),
        n_pairs=n_pairs,
        channel_labels=epochs.channel_labels,
        sample_rate_hz=epochs.sample_rate_hz,
        metadata={"normalize_trace": normalize_trace},
    )

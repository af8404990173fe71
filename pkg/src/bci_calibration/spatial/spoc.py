"""Source power comodulation with a two-class target."""

from __future__ import annotations

import numpy as np

from ..data.recording import REST, TASK, EpochSet
from ..errors import CalibrationError, ErrorCode
from ..linalg import generalized_eig_sym
from .csp import require_components, trial_covariances
from .model import BandFilters, SpatialMethod, SpatialModel, apply_sign_convention, patterns_from_filters


def label_target(labels: np.ndarray) -> np.ndarray:
    """Task = +1, rest = -1, z-scored across trials."""
    z = np.where(np.asarray(labels) == TASK, 1.0, -1.0)
    sd = z.std()
    if sd == 0.0:
        raise CalibrationError(ErrorCode.ZERO_LABEL_VARIANCE, "zero label variance", {"trials": z.shape[0]})
    return (z - z.mean()) / sd


def train_spoc(epochs: EpochSet, n_components: int = 6, normalize_trace: bool = True) -> SpatialModel:
    """Solve (C_z, C_mean) where C_z = mean_e z(e) C(e).

    Takes ``n_components / 2`` filters from each end of the spectrum: the
    top end's power rises with the task, the bottom end's falls.
    """
    z = label_target(epochs.labels)
    counts = epochs.class_counts()
    if min(counts[REST], counts[TASK]) < 2:
        raise CalibrationError(ErrorCode.SINGLE_CLASS, "SPoC needs at least 2 trials per class", counts)
    if n_components % 2:
        raise CalibrationError(ErrorCode.TOO_MANY_COMPONENTS, "n_components must be even", {"n_components": n_components})
    require_components(n_components // 2, epochs.n_channels, "n_components/2")

    covs = trial_covariances(epochs, normalize_trace)
    c_mean = covs.mean(axis=0)
    c_z = np.einsum("t,tcd->cd", z, covs) / z.shape[0]
    basis = generalized_eig_sym(c_z, c_mean)
    w, eigenvalues = basis.ends(n_components // 2)
    w, a = apply_sign_convention(w, patterns_from_filters(w, c_mean))
    band = BandFilters(band_hz=None, filters=w, patterns=a, eigenvalues=eigenvalues)
    return SpatialModel(
        method=SpatialMethod.SPOC,
        bands=(band,),
        n_pairs=n_components // 2,
        channel_labels=epochs.channel_labels,
        sample_rate_hz=epochs.sample_rate_hz,
        metadata={"normalize_trace": normalize_trace},
    )


def spoc_objective(w: np.ndarray, c_z: np.ndarray, c_mean: np.ndarray) -> np.ndarray:
    """w^T C_z w / w^T C_mean w for each column of ``w``."""
    w = np.atleast_2d(w.T).T
    return np.einsum("ck,cd,dk->k", w, c_z, w) / np.einsum("ck,cd,dk->k", w, c_mean, w)

"""Log-variance features."""

from __future__ import annotations

import numpy as np
from loguru import logger

from ..data.recording import EpochSet
from ..spatial.model import SpatialModel

VARIANCE_FLOOR = 1e-12


def features_logvar(epochs: EpochSet, spatial: SpatialModel) -> np.ndarray:
    """Natural log of per-component variance, bands concatenated in band order.

    Returns [trial x feature]; each row is one trial's feature vector.
    """
    blocks = []
    for components in spatial.component_signals(epochs):
        variance = components.var(axis=-1)
        low = variance < VARIANCE_FLOOR
        if low.any():
            logger.warning("{} zero-variance component values floored at log({})", int(low.sum()), VARIANCE_FLOOR)
            variance = np.maximum(variance, VARIANCE_FLOOR)
        blocks.append(np.log(variance))
    return np.hstack(blocks)

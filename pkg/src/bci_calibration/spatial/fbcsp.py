"""Filter-bank CSP: one CSP model per subband, all bands kept."""

from __future__ import annotations

from typing import Sequence

from loguru import logger

from ..batch import BatchProcessor
from ..data.recording import EpochSet
from ..dsp.filters import IirFilter, filter_forward
from ..errors import CalibrationError, ErrorCode
from .csp import csp_band, require_both_classes, require_components
from .model import BandFilters, SpatialMethod, SpatialModel


def train_fbcsp(
    epochs: EpochSet,
    bank: Sequence[IirFilter],
    n_pairs: int = 3,
    normalize_trace: bool = True,
    max_workers: int = 1,
) -> SpatialModel:
    """Filter the epochs through every band of ``bank`` and train CSP on each.

    A band that fails aborts training; bands are merged in bank order
    regardless of ``max_workers``.
    """
    if not bank:
        raise CalibrationError(ErrorCode.EMPTY_FILTER_BANK, "filter bank is empty")
    require_both_classes(epochs)
    require_components(n_pairs, epochs.n_channels)

    def train_band(f: IirFilter) -> BandFilters:
        return csp_band(filter_forward(f, epochs), n_pairs, normalize_trace, f.band_hz, f.order)

    batch = BatchProcessor(max_workers).process(list(bank), train_band)
    if batch.errors:
        index, error = batch.errors[0]
        band_hz = bank[index].band_hz
        if isinstance(error, CalibrationError):
            raise error.tag(band=index, band_hz=band_hz)
        raise CalibrationError(
            ErrorCode.INTERNAL_ERROR, f"band {index} failed: {error}", {"band": index, "band_hz": band_hz}
        ) from error

    bands = tuple(batch.results)
    logger.debug("fbcsp trained {} bands, {} features", len(bands), sum(b.n_components for b in bands))
    return SpatialModel(
        method=SpatialMethod.FBCSP,
        bands=bands,
        n_pairs=n_pairs,
        channel_labels=epochs.channel_labels,
        sample_rate_hz=epochs.sample_rate_hz,
        metadata={"normalize_trace": normalize_trace, "n_bands": len(bands)},
    )

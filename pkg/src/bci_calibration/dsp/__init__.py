from .filters import (
    IirFilter,
    decimate,
    design_butterworth_bandpass,
    design_butterworth_lowpass,
    filter_forward,
    make_filter_bank,
    preprocess,
)
from .spectra import CrossSpectrumSet, cross_spectra, spectral_filter, window_length

__all__ = [
    "CrossSpectrumSet",
    "IirFilter",
    "cross_spectra",
    "decimate",
    "design_butterworth_bandpass",
    "design_butterworth_lowpass",
    "filter_forward",
    "make_filter_bank",
    "preprocess",
    "spectral_filter",
    "window_length",
]

from .csp import class_covariances, trial_covariances, train_csp
from .fbcsp import train_fbcsp
from .model import BandFilters, SpatialMethod, SpatialModel, apply_sign_convention, patterns_from_filters
from .speccsp import spectral_update, train_speccsp
from .spoc import label_target, spoc_objective, train_spoc

__all__ = [
    "BandFilters",
    "SpatialMethod",
    "SpatialModel",
    "apply_sign_convention",
    "class_covariances",
    "label_target",
    "patterns_from_filters",
    "spectral_update",
    "spoc_objective",
    "train_csp",
    "train_fbcsp",
    "train_speccsp",
    "train_spoc",
    "trial_covariances",
]

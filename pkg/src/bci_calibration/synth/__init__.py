from .generator import (
    GroundTruth,
    Simulation,
    band_limited_noise,
    generate_session,
    ground_truth,
    pink_noise,
    random_mixing,
    simulate,
)
from .spec import MONTAGE_10_20, SourceSpec, SynthSpec
from .suite import MANIFEST_NAME, SuiteSession, generate_suite, read_manifest, write_suite

__all__ = [
    "GroundTruth",
    "MANIFEST_NAME",
    "MONTAGE_10_20",
    "Simulation",
    "SourceSpec",
    "SuiteSession",
    "SynthSpec",
    "band_limited_noise",
    "generate_session",
    "generate_suite",
    "ground_truth",
    "pink_noise",
    "random_mixing",
    "read_manifest",
    "simulate",
    "write_suite",
]

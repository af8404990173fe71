"""End-to-end calibration pipeline: preprocess, epoch, spatial filter, features, LDA."""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Optional, Union

import numpy as np
from typing_extensions import Self

from ..config import PipelineConfig
from ..core.tracing import logger, stage
from ..data.epochs import extract_epochs
from ..data.recording import EpochSet, Recording
from ..dsp.filters import make_filter_bank, preprocess
from ..errors import CalibrationError, ErrorCode
from ..spatial import SpatialMethod, SpatialModel, train_csp, train_fbcsp, train_speccsp, train_spoc
from .features import features_logvar
from .lda import LdaModel, train_lda

FORMAT_TAG = "bci-calibration-pipeline/1"

Prediction = tuple[int, float]


@dataclass(frozen=True, eq=False)
class PipelineModel:
    """A trained, deployable classifier.

    ``sample_rate_hz`` is the raw recording rate the model expects;
    ``spatial.sample_rate_hz`` is the rate after decimation.
    """
    method: SpatialMethod
    config: PipelineConfig
    spatial: SpatialModel
    lda: LdaModel
    feature_means: np.ndarray
    feature_scales: np.ndarray
    channel_labels: tuple[str, ...]
    sample_rate_hz: float
    format: str = FORMAT_TAG

    def __post_init__(self) -> None:
        dims = {
            "spatial": self.spatial.n_components,
            "means": self.feature_means.shape[0],
            "scales": self.feature_scales.shape[0],
            "lda": self.lda.weights.shape[0],
        }
        if len(set(dims.values())) != 1:
            raise CalibrationError(ErrorCode.FEATURE_MISMATCH, "feature dimensions disagree", dims)

    @property
    def n_features(self) -> int:
        return self.spatial.n_components

    def preprocessing(self) -> dict[str, Any]:
        return {
            "band_hz": [self.config.band_low_hz, self.config.band_high_hz],
            "filter_order": self.config.filter_order,
            "decimation": self.config.decimation,
        }

    def standardize(self, features: np.ndarray) -> np.ndarray:
        return (features - self.feature_means) / self.feature_scales

    def to_dict(self) -> dict[str, Any]:
        return {
            "format": self.format,
            "method": self.method.value,
            "config": self.config.to_dict(),
            "preprocessing": self.preprocessing(),
            "channel_labels": list(self.channel_labels),
            "sample_rate_hz": self.sample_rate_hz,
            "spatial": self.spatial.to_dict(),
            "feature_means": self.feature_means.tolist(),
            "feature_scales": self.feature_scales.tolist(),
            "lda": self.lda.to_dict(),
        }

    @classmethod
    def from_dict(cls, data: dict[str, Any]) -> Self:
        tag = data.get("format") if isinstance(data, dict) else None
        if tag != FORMAT_TAG:
            raise CalibrationError(ErrorCode.MODEL_FORMAT, "unsupported model format", {"format": tag, "expected": FORMAT_TAG})
        try:
            return cls(
                method=SpatialMethod(data["method"]),
                config=PipelineConfig.from_dict(data["config"]),
                spatial=SpatialModel.from_dict(data["spatial"]),
                lda=LdaModel.from_dict(data["lda"]),
                feature_means=np.asarray(data["feature_means"], dtype=np.float64),
                feature_scales=np.asarray(data["feature_scales"], dtype=np.float64),
                channel_labels=tuple(data["channel_labels"]),
                sample_rate_hz=float(data["sample_rate_hz"]),
            )
        except (KeyError, TypeError, ValueError) as exc:
            raise CalibrationError(ErrorCode.MODEL_FORMAT, f"invalid model document: {exc}") from exc


def train_spatial(epochs: EpochSet, method: SpatialMethod | str, config: PipelineConfig) -> SpatialModel:
    """Dispatch to the method's spatial trainer."""
    method = SpatialMethod(method)
    if method is SpatialMethod.CSP:
        return train_csp(epochs, config.n_pairs, config.normalize_trace)
    if method is SpatialMethod.FBCSP:
        bank = make_filter_bank(
            config.band_low_hz, config.band_high_hz, config.bank_width_hz, epochs.sample_rate_hz, config.filter_order
        )
        return train_fbcsp(epochs, bank, config.n_pairs, config.normalize_trace)
    if method is SpatialMethod.SPECCSP:
        return train_speccsp(
            epochs,
            config.n_pairs,
            config.speccsp_p,
            config.speccsp_q,
            config.speccsp_iterations,
            config.spectral_resolution_hz,
            (config.band_low_hz, config.band_high_hz),
        )
    return train_spoc(epochs, config.spoc_components, config.normalize_trace)


def prepare_epochs(rec: Recording, config: PipelineConfig) -> EpochSet:
    """Bandpass, decimate and epoch a raw recording."""
    with stage("preprocess"):
        filtered = preprocess(rec, (config.band_low_hz, config.band_high_hz), config.filter_order, config.decimation)
    with stage("epoch"):
        return extract_epochs(filtered, config.cue_label, config.task_window_s, config.rest_window_s)


def train_from_epochs(
    epochs: EpochSet,
    method: SpatialMethod | str,
    config: PipelineConfig,
    raw_sample_rate_hz: Optional[float] = None,
    **context: Any,
) -> PipelineModel:
    """Fit spatial filters, standardisation and LDA on preprocessed epochs."""
    method = SpatialMethod(method)
    with stage("spatial", method=method.value, **context):
        spatial = train_spatial(epochs, method, config)
    with stage("features", method=method.value, **context):
        features = features_logvar(epochs, spatial)
        means = features.mean(axis=0)
        scales = features.std(axis=0)
        scales = np.where(scales > 0.0, scales, 1.0)
    with stage("classifier", method=method.value, **context):
        lda = train_lda((features - means) / scales, epochs.labels, config.lda_gamma)
    return PipelineModel(
        method=method,
        config=config,
        spatial=spatial,
        lda=lda,
        feature_means=means,
        feature_scales=scales,
        channel_labels=epochs.channel_labels,
        sample_rate_hz=raw_sample_rate_hz or epochs.sample_rate_hz * config.decimation,
    )


def train_pipeline(
    rec: Recording,
    method: SpatialMethod | str,
    config: Optional[PipelineConfig] = None,
) -> PipelineModel:
    """Train the full chain on one recording."""
    config = (config or PipelineConfig()).validate()
    epochs = prepare_epochs(rec, config)
    model = train_from_epochs(epochs, method, config, raw_sample_rate_hz=rec.sample_rate_hz)
    logger.info("trained {} on {} trials ({} features)", model.method.value, epochs.n_trials, model.n_features)
    return model


def decision_scores(model: PipelineModel, epochs: EpochSet) -> np.ndarray:
    """Real-valued LDA scores w.f + b for every trial."""
    if tuple(epochs.channel_labels) != model.channel_labels:
        raise CalibrationError(
            ErrorCode.MONTAGE_MISMATCH,
            "channel labels do not match the training montage",
            {"expected": list(model.channel_labels), "got": list(epochs.channel_labels)},
        )
    if not np.isclose(epochs.sample_rate_hz, model.spatial.sample_rate_hz):
        raise CalibrationError(
            ErrorCode.MONTAGE_MISMATCH,
            "epoch sample rate does not match the model",
            {"expected": model.spatial.sample_rate_hz, "got": epochs.sample_rate_hz},
        )
    features = features_logvar(epochs, model.spatial)
    return model.lda.decision(model.standardize(features))


def predict(model: PipelineModel, epochs: EpochSet) -> list[Prediction]:
    """(label, score) per trial; a score of exactly 0 is the rest class."""
    scores = decision_scores(model, epochs)
    return [(1 if score > 0.0 else 0, float(score)) for score in scores]


def predict_recording(model: PipelineModel, rec: Recording) -> tuple[EpochSet, list[Prediction]]:
    """Preprocess and epoch ``rec`` with the model's settings, then predict."""
    if not np.isclose(rec.sample_rate_hz, model.sample_rate_hz):
        raise CalibrationError(
            ErrorCode.MONTAGE_MISMATCH,
            "recording sample rate does not match the model",
            {"expected": model.sample_rate_hz, "got": rec.sample_rate_hz},
        )
    epochs = prepare_epochs(rec, model.config)
    return epochs, predict(model, epochs)


def model_to_json(model: PipelineModel) -> str:
    return json.dumps(model.to_dict(), indent=2, sort_keys=True) + "\n"


def save_model(model: PipelineModel, path: Union[str, Path]) -> Path:
    target = Path(path)
    target.parent.mkdir(parents=True, exist_ok=True)
    target.write_text(model_to_json(model), encoding="utf-8")
    return target


def load_model(path: Union[str, Path]) -> PipelineModel:
    source = Path(path)
    try:
        data = json.loads(source.read_text(encoding="utf-8"))
    except (OSError, json.JSONDecodeError) as exc:
        raise CalibrationError(ErrorCode.MODEL_FORMAT, f"cannot read model file: {exc}", {"path": str(source)}) from exc
    return PipelineModel.from_dict(data)

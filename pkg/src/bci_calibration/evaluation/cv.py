"""Leakage-free chronological cross-validation of a calibration pipeline."""

from __future__ import annotations

import time
from dataclasses import dataclass
from typing import Any, Optional

import numpy as np

from ..batch import BatchProcessor
from ..config import PipelineConfig
from ..core.tracing import logger, stage
from ..data.recording import EpochSet, Recording
from ..errors import CalibrationError, ErrorCode
from ..pipeline.model import predict, prepare_epochs, train_from_epochs
from ..spatial.model import SpatialMethod
from .folds import FoldPlan, plan_folds
from .metrics import RATE_NAMES, ConfusionMetrics, confusion


@dataclass
class CrossValidationResult:
    """Fold metrics of one (session, method) run, in fold order."""
    method: str
    session: str
    folds: list[ConfusionMetrics]
    subject: str = ""
    fit_ms: float = 0.0
    n_trials: int = 0

    def fold_values(self, metric: str = "accuracy") -> np.ndarray:
        return np.array([fold.rate(metric) for fold in self.folds])

    def mean(self, metric: str = "accuracy") -> float:
        return float(np.nanmean(self.fold_values(metric)))

    def sd(self, metric: str = "accuracy") -> float:
        values = self.fold_values(metric)
        values = values[np.isfinite(values)]
        return float(np.std(values, ddof=1)) if values.size > 1 else float("nan")

    @property
    def mean_accuracy(self) -> float:
        return self.mean("accuracy")

    def summary(self) -> dict[str, float]:
        return {name: self.mean(name) for name in RATE_NAMES}

    def to_dict(self) -> dict[str, Any]:
        return {
            "method": self.method,
            "session": self.session,
            "subject": self.subject,
            "n_trials": self.n_trials,
            "folds": [fold.to_dict() for fold in self.folds],
        }

    @classmethod
    def from_dict(cls, data: dict[str, Any]) -> "CrossValidationResult":
        return cls(
            method=data["method"],
            session=data["session"],
            subject=data.get("subject", ""),
            n_trials=int(data.get("n_trials", 0)),
            folds=[ConfusionMetrics.from_dict(f) for f in data["folds"]],
        )


def cross_validate_epochs(
    epochs: EpochSet,
    method: SpatialMethod | str,
    config: Optional[PipelineConfig] = None,
    n_folds: int = 10,
    margin: int = 5,
    session: str = "",
    max_workers: int = 1,
) -> CrossValidationResult:
    """Refit the spatial filters, standardisation and LDA on every fold's
    training trials only and score the held-out block."""
    config = (config or PipelineConfig()).validate()
    method = SpatialMethod(method)
    # chronological rank -> trial index
    chrono = np.argsort(epochs.trial_order, kind="stable")
    plan: FoldPlan = plan_folds(epochs.n_trials, n_folds, margin, labels=epochs.labels[chrono])

    def run_fold(fold_index: int) -> tuple[ConfusionMetrics, float]:
        fold = plan.folds[fold_index]
        train = epochs.subset(chrono[fold.train])
        test = epochs.subset(chrono[fold.test])
        start = time.perf_counter()
        model = train_from_epochs(train, method, config, fold=fold_index, session=session)
        fit_ms = (time.perf_counter() - start) * 1000.0
        with stage("predict", method=method.value, fold=fold_index, session=session):
            labels = [label for label, _ in predict(model, test)]
        return confusion(test.labels, labels), fit_ms

    batch = BatchProcessor(max_workers).process(list(range(plan.n_folds)), run_fold)
    if batch.errors:
        index, error = batch.errors[0]
        if isinstance(error, CalibrationError):
            raise error.tag(fold=index, method=method.value, session=session)
        raise CalibrationError(
            ErrorCode.INTERNAL_ERROR, f"fold {index} failed: {error}", {"fold": index, "method": method.value}
        ) from error

    folds = [metrics for metrics, _ in batch.results]
    fit_ms = sum(ms for _, ms in batch.results)
    result = CrossValidationResult(
        method=method.value, session=session, folds=folds, fit_ms=fit_ms, n_trials=epochs.n_trials
    )
    logger.info("{} {}: accuracy {:.3f} +- {:.3f} over {} folds",
                session or "session", method.value, result.mean(), result.sd(), len(folds))
    return result


def cross_validate(
    rec: Recording,
    method: SpatialMethod | str,
    config: Optional[PipelineConfig] = None,
    n_folds: int = 10,
    margin: int = 5,
    session: str = "",
    max_workers: int = 1,
) -> CrossValidationResult:
    """Chronological blockwise CV on one recording.

    Bandpass and decimation are causal and untrained, so they run once on
    the whole recording before epoching.
    """
    config = (config or PipelineConfig()).validate()
    epochs = prepare_epochs(rec, config)
    return cross_validate_epochs(epochs, method, config, n_folds, margin, session, max_workers)

"""Two-class Fisher LDA with covariance shrinkage."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Any

import numpy as np
from loguru import logger
from scipy import linalg
from typing_extensions import Self

from ..data.recording import REST, TASK
from ..errors import CalibrationError, ErrorCode
from ..linalg import PD_FLOOR_GAMMA, PD_TOLERANCE, Covariance, Gamma, ledoit_wolf_gamma, shrink


@dataclass(frozen=True, eq=False)
class LdaModel:
    """Predict task iff w.f + b > 0."""
    weights: np.ndarray
    bias: float
    shrinkage_gamma: float

    def decision(self, features: np.ndarray) -> np.ndarray:
        return np.atleast_2d(features) @ self.weights + self.bias

    def predict(self, features: np.ndarray) -> np.ndarray:
        return np.where(self.decision(features) > 0.0, TASK, REST)

    def to_dict(self) -> dict[str, Any]:
        return {"weights": self.weights.tolist(), "bias": self.bias, "shrinkage_gamma": self.shrinkage_gamma}

    @classmethod
    def from_dict(cls, data: dict[str, Any]) -> Self:
        return cls(
            weights=np.asarray(data["weights"], dtype=np.float64),
            bias=float(data["bias"]),
            shrinkage_gamma=float(data["shrinkage_gamma"]),
        )


def _is_singular(matrix: np.ndarray) -> bool:
    trace = float(np.trace(matrix))
    return trace <= 0.0 or float(np.linalg.eigvalsh(matrix)[0]) <= PD_TOLERANCE * trace


def train_lda(features: np.ndarray, labels: np.ndarray, gamma: Gamma = "auto") -> LdaModel:
    """Shrinkage LDA on [trial x feature] data.

    The pooled within-class covariance (1/n, class-centred) is shrunk with
    ``gamma``. A singular covariance at gamma=0 falls back to "auto".
    """
    x = np.atleast_2d(np.asarray(features, dtype=np.float64))
    y = np.asarray(labels)
    if x.shape[0] != y.shape[0]:
        raise CalibrationError(ErrorCode.LENGTH_MISMATCH, "one label per feature row required",
                               {"rows": x.shape[0], "labels": y.shape[0]})
    if x.shape[1] < 1:
        raise CalibrationError(ErrorCode.FEATURE_MISMATCH, "feature dimension must be >= 1")
    if not np.all(np.isfinite(x)):
        raise CalibrationError(ErrorCode.FEATURE_MISMATCH, "features must be finite")
    task, rest = x[y == TASK], x[y == REST]
    if task.shape[0] == 0 or rest.shape[0] == 0:
        raise CalibrationError(ErrorCode.SINGLE_CLASS, "LDA needs both classes",
                               {"task": task.shape[0], "rest": rest.shape[0]})

    mu1, mu0 = task.mean(axis=0), rest.mean(axis=0)
    centred = np.vstack([task - mu1, rest - mu0])
    pooled = Covariance(matrix=centred.T @ centred / centred.shape[0], n_observations=centred.shape[0],
                        observations=centred)

    if not isinstance(gamma, str) and float(gamma) == 0.0 and _is_singular(pooled.matrix):
        logger.warning("pooled covariance singular at gamma=0; falling back to automatic shrinkage")
        gamma = "auto"
    resolved = ledoit_wolf_gamma(pooled) if gamma == "auto" else float(gamma)
    matrix = shrink(pooled, resolved).matrix
    if _is_singular(matrix):
        scale = max(float(np.trace(matrix)) / matrix.shape[0], 1.0)
        logger.warning("shrunk covariance still singular; adding {} floor", PD_FLOOR_GAMMA)
        matrix = matrix + PD_FLOOR_GAMMA * scale * np.eye(matrix.shape[0])

    w = linalg.solve(matrix, mu1 - mu0, assume_a="pos")
    if not np.all(np.isfinite(w)) or float(np.linalg.norm(w)) == 0.0:
        raise CalibrationError(ErrorCode.DEGENERATE_CLASSIFIER, "LDA weights are zero or not finite",
                               {"gamma": resolved})
    bias = float(-w @ (mu1 + mu0) / 2.0)
    return LdaModel(weights=w, bias=bias, shrinkage_gamma=resolved)

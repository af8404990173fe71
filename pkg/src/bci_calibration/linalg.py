"""Covariance estimation, shrinkage and the symmetric-definite generalized eigensolver."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Union

import numpy as np
from loguru import logger
from scipy import linalg
from sklearn.covariance import ledoit_wolf_shrinkage

from .errors import CalibrationError, ErrorCode

Gamma = Union[float, str]

PD_TOLERANCE = 1e-10
PD_FLOOR_GAMMA = 1e-6


@dataclass(frozen=True, eq=False)
class Covariance:
    """Symmetric covariance matrix.

    ``observations`` keeps the centred (and trace-scaled) data rows
    [observation x dim] so "auto" shrinkage can be estimated later;
    matrices averaged over trials carry none.
    """
    matrix: np.ndarray
    n_observations: int
    observations: Optional[np.ndarray] = None

    def __post_init__(self) -> None:
        matrix = np.array(self.matrix, dtype=np.float64)
        if matrix.ndim != 2 or matrix.shape[0] != matrix.shape[1]:
            raise CalibrationError(ErrorCode.INVALID_RECORDING, "covariance must be a square matrix", {"shape": matrix.shape})
        matrix = 0.5 * (matrix + matrix.T)
        matrix.setflags(write=False)
        object.__setattr__(self, "matrix", matrix)

    @classmethod
    def from_matrix(cls, matrix: np.ndarray, n_observations: int = 0) -> "Covariance":
        return cls(matrix=matrix, n_observations=n_observations)

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]

    @property
    def trace(self) -> float:
        return float(np.trace(self.matrix))


def covariance(x: np.ndarray, normalize_trace: bool = True) -> Covariance:
    """Mean-removed sample covariance of ``x`` [channel x sample], 1/n normalised.

    With ``normalize_trace`` the matrix is scaled so its trace equals the
    channel count.
    """
    x = np.asarray(x, dtype=np.float64)
    if x.ndim == 1:
        x = x[np.newaxis, :]
    n_channels, n_samples = x.shape
    if n_samples < 2:
        raise CalibrationError(ErrorCode.TOO_FEW_SAMPLES, "covariance needs at least 2 samples", {"samples": n_samples})
    centred = x - x.mean(axis=1, keepdims=True)
    matrix = centred @ centred.T / n_samples
    observations = centred.T
    if normalize_trace:
        trace = float(np.trace(matrix))
        if trace <= 0.0:
            raise CalibrationError(ErrorCode.ZERO_TRACE, "zero trace", {"channels": n_channels})
        scale = n_channels / trace
        matrix = matrix * scale
        observations = observations * np.sqrt(scale)
    return Covariance(matrix=matrix, n_observations=n_samples, observations=observations)


def ledoit_wolf_gamma(c: Covariance) -> float:
    """Analytic Ledoit-Wolf shrinkage coefficient from the stored observations."""
    if c.observations is None:
        raise CalibrationError(
            ErrorCode.INVALID_SHRINKAGE,
            "automatic shrinkage needs the observations behind the covariance",
        )
    return float(ledoit_wolf_shrinkage(c.observations, assume_centered=True))


def shrink(c: Covariance, gamma: Gamma) -> Covariance:
    """(1 - gamma) * C + gamma * (trace(C)/d) * I; ``"auto"`` uses Ledoit-Wolf."""
    if isinstance(gamma, str):
        if gamma != "auto":
            raise CalibrationError(ErrorCode.INVALID_SHRINKAGE, "gamma must be a number in [0, 1] or 'auto'", {"gamma": gamma})
        gamma = ledoit_wolf_gamma(c)
    gamma = float(gamma)
    if not 0.0 <= gamma <= 1.0:
        raise CalibrationError(ErrorCode.INVALID_SHRINKAGE, "gamma outside [0, 1]", {"gamma": gamma})
    if gamma == 0.0:
        return c
    target = (c.trace / c.dim) * np.eye(c.dim)
    matrix = (1.0 - gamma) * c.matrix + gamma * target
    return Covariance(matrix=matrix, n_observations=c.n_observations, observations=c.observations)


@dataclass(frozen=True, eq=False)
class EigenBasis:
    """Solutions of A w = lambda B w; eigenvalues descending, eigenvectors as columns."""
    eigenvalues: np.ndarray
    eigenvectors: np.ndarray
    regularization: float = 0.0

    def ends(self, n_per_end: int) -> tuple[np.ndarray, np.ndarray]:
        """First and last ``n_per_end`` components (columns, eigenvalues)."""
        d = self.eigenvalues.shape[0]
        idx = np.r_[np.arange(n_per_end), np.arange(d - n_per_end, d)]
        return self.eigenvectors[:, idx], self.eigenvalues[idx]


def _as_matrix(m: Union[Covariance, np.ndarray]) -> np.ndarray:
    matrix = m.matrix if isinstance(m, Covariance) else np.asarray(m, dtype=np.float64)
    return 0.5 * (matrix + matrix.T)


def generalized_eig_sym(a: Union[Covariance, np.ndarray], b: Union[Covariance, np.ndarray]) -> EigenBasis:
    """Solve A w = lambda B w through the Cholesky factor of B.

    If B is not safely positive definite, it is shrunk by 1e-6 towards
    its scaled identity and the regularisation is recorded.
    """
    a_mat = _as_matrix(a)
    b_mat = _as_matrix(b)
    if a_mat.shape != b_mat.shape or a_mat.shape[0] != a_mat.shape[1]:
        raise CalibrationError(ErrorCode.NOT_POSITIVE_DEFINITE, "pencil matrices must be square and equal-sized",
                               {"a": a_mat.shape, "b": b_mat.shape})
    regularization = 0.0
    trace = float(np.trace(b_mat))
    min_eig = float(np.linalg.eigvalsh(b_mat)[0])
    if not min_eig > PD_TOLERANCE * abs(trace):
        logger.warning("metric matrix not positive definite (min eig {:.3g}); applying {} floor shrinkage",
                       min_eig, PD_FLOOR_GAMMA)
        b_mat = shrink(Covariance.from_matrix(b_mat), PD_FLOOR_GAMMA).matrix
        regularization = PD_FLOOR_GAMMA
    try:
        chol = linalg.cholesky(b_mat, lower=True)
    except linalg.LinAlgError as exc:
        raise CalibrationError(
            ErrorCode.NOT_POSITIVE_DEFINITE,
            "metric matrix not positive definite after regularization",
            {"min_eigenvalue": min_eig, "trace": trace},
        ) from exc
    # M = L^-1 A L^-T
    left = linalg.solve_triangular(chol, a_mat, lower=True)
    m = linalg.solve_triangular(chol, left.T, lower=True)
    m = 0.5 * (m + m.T)
    eigenvalues, u = linalg.eigh(m)
    w = linalg.solve_triangular(chol.T, u, lower=False)
    order = np.argsort(eigenvalues)[::-1]
    return EigenBasis(eigenvalues=eigenvalues[order], eigenvectors=w[:, order], regularization=regularization)

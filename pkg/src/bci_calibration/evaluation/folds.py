"""Chronological blockwise fold plans with a guard margin."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from ..data.recording import REST, TASK
from ..errors import CalibrationError, ErrorCode

MIN_TRAIN_PER_CLASS = 2


@dataclass(frozen=True, eq=False)
class Fold:
    """Positions are chronological trial ranks."""
    index: int
    test: np.ndarray
    train: np.ndarray


@dataclass(frozen=True, eq=False)
class FoldPlan:
    n_trials: int
    n_folds: int
    margin: int
    folds: tuple[Fold, ...]

    def min_train_test_distance(self) -> int:
        """Smallest |i - j| over train/test pairs of any fold."""
        distances = [
            int(np.min(np.abs(fold.train[:, None] - fold.test[None, :])))
            for fold in self.folds
            if fold.train.size and fold.test.size
        ]
        return min(distances) if distances else self.n_trials


def plan_folds(
    n_trials: int,
    n_folds: int = 10,
    margin: int = 5,
    labels: Optional[np.ndarray] = None,
) -> FoldPlan:
    """Contiguous test blocks; training excludes the block and ``margin``
    trials on each side of it.

    With ``labels`` (in chronological order) every fold must keep at least
    two training trials per class; without, at least four training trials.
    """
    if n_folds < 2 or n_trials < n_folds:
        raise CalibrationError(
            ErrorCode.INSUFFICIENT_DATA,
            "need n_trials >= n_folds >= 2",
            {"n_trials": n_trials, "n_folds": n_folds},
        )
    if margin < 0:
        raise CalibrationError(ErrorCode.INSUFFICIENT_DATA, "margin must be >= 0", {"margin": margin})
    if labels is not None and len(labels) != n_trials:
        raise CalibrationError(ErrorCode.LENGTH_MISMATCH, "one label per trial required",
                               {"n_trials": n_trials, "labels": len(labels)})

    positions = np.arange(n_trials)
    folds = []
    for index, test in enumerate(np.array_split(positions, n_folds)):
        lo, hi = int(test[0]) - margin, int(test[-1]) + margin
        train = positions[(positions < lo) | (positions > hi)]
        if labels is None:
            enough = train.size >= 2 * MIN_TRAIN_PER_CLASS
            counts = {"train": int(train.size)}
        else:
            train_labels = np.asarray(labels)[train]
            counts = {"task": int(np.sum(train_labels == TASK)), "rest": int(np.sum(train_labels == REST))}
            enough = min(counts.values()) >= MIN_TRAIN_PER_CLASS
        if not enough:
            raise CalibrationError(
                ErrorCode.INSUFFICIENT_TRAIN_TRIALS,
                "fold left with too few training trials",
                {"fold": index, "margin": margin, **counts},
            )
        folds.append(Fold(index=index, test=test, train=train))
    return FoldPlan(n_trials=n_trials, n_folds=n_folds, margin=margin, folds=tuple(folds))

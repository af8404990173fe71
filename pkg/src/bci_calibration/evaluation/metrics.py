"""Confusion counts and rates; the task class is positive."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Any, Sequence

import numpy as np

from ..data.recording import REST, TASK
from ..errors import CalibrationError, ErrorCode

RATE_NAMES = ("accuracy", "tpr", "tnr", "fpr", "fnr")


def _ratio(num: int, den: int) -> float:
    return num / den if den else math.nan


@dataclass(frozen=True)
class ConfusionMetrics:
    tp: int
    tn: int
    fp: int
    fn: int

    @property
    def total(self) -> int:
        return self.tp + self.tn + self.fp + self.fn

    @property
    def accuracy(self) -> float:
        return _ratio(self.tp + self.tn, self.total)

    @property
    def tpr(self) -> float:
        return _ratio(self.tp, self.tp + self.fn)

    @property
    def fnr(self) -> float:
        return 1.0 - self.tpr

    @property
    def tnr(self) -> float:
        return _ratio(self.tn, self.tn + self.fp)

    @property
    def fpr(self) -> float:
        return 1.0 - self.tnr

    def rate(self, name: str) -> float:
        if name not in RATE_NAMES:
            raise KeyError(name)
        return getattr(self, name)

    def to_dict(self) -> dict[str, Any]:
        data: dict[str, Any] = {"tp": self.tp, "tn": self.tn, "fp": self.fp, "fn": self.fn}
        data.update({name: self.rate(name) for name in RATE_NAMES})
        return data

    @classmethod
    def from_dict(cls, data: dict[str, Any]) -> "ConfusionMetrics":
        return cls(tp=int(data["tp"]), tn=int(data["tn"]), fp=int(data["fp"]), fn=int(data["fn"]))


def confusion(labels_true: Sequence[int], labels_pred: Sequence[int]) -> ConfusionMetrics:
    """Count outcomes; rates with a zero denominator are NaN."""
    y = np.asarray(labels_true)
    p = np.asarray(labels_pred)
    if y.shape != p.shape:
        raise CalibrationError(ErrorCode.LENGTH_MISMATCH, "label sequences differ in length",
                               {"true": y.shape[0], "pred": p.shape[0]})
    if y.size == 0:
        raise CalibrationError(ErrorCode.INSUFFICIENT_DATA, "confusion needs at least one trial")
    return ConfusionMetrics(
        tp=int(np.sum((y == TASK) & (p == TASK))),
        tn=int(np.sum((y == REST) & (p == REST))),
        fp=int(np.sum((y == REST) & (p == TASK))),
        fn=int(np.sum((y == TASK) & (p == REST))),
    )

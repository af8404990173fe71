"""One-way repeated-measures ANOVA and Bonferroni-corrected paired t-tests.

Rows of ``values`` are units (sessions or subjects), columns are methods.
No sphericity correction is applied.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass
from itertools import combinations
from typing import Any, Optional, Sequence

import numpy as np
from scipy import special, stats

from ..errors import CalibrationError, ErrorCode

ZERO_TOLERANCE = 1e-12


@dataclass(frozen=True)
class AnovaResult:
    f: float
    df_method: int
    df_error: int
    p: float
    degenerate: bool = False

    @property
    def df(self) -> tuple[int, int]:
        return self.df_method, self.df_error

    def to_dict(self) -> dict[str, Any]:
        return asdict(self)


@dataclass(frozen=True)
class PairwiseResult:
    pair: tuple[str, str]
    t: float
    p: float
    p_corrected: float
    mean_difference: float

    def to_dict(self) -> dict[str, Any]:
        data = asdict(self)
        data["pair"] = list(self.pair)
        return data


def _check_table(values: np.ndarray) -> np.ndarray:
    table = np.asarray(values, dtype=np.float64)
    if table.ndim != 2 or table.shape[0] < 2 or table.shape[1] < 2:
        raise CalibrationError(
            ErrorCode.INSUFFICIENT_DATA,
            "need at least 2 units and 2 methods",
            {"shape": list(table.shape)},
        )
    if not np.all(np.isfinite(table)):
        raise CalibrationError(ErrorCode.INSUFFICIENT_DATA, "table has missing or non-finite cells")
    return table


def f_survival(f: float, df1: int, df2: int) -> float:
    """P(F > f) through the regularized incomplete beta function."""
    if math.isinf(f):
        return 0.0
    return float(special.betainc(df2 / 2.0, df1 / 2.0, df2 / (df2 + df1 * f)))


def rm_anova(values: np.ndarray) -> AnovaResult:
    """F = MS_method / MS_(method x unit)."""
    table = _check_table(values)
    n, k = table.shape
    grand = table.mean()
    ss_total = float(np.sum((table - grand) ** 2))
    ss_method = float(n * np.sum((table.mean(axis=0) - grand) ** 2))
    ss_unit = float(k * np.sum((table.mean(axis=1) - grand) ** 2))
    ss_error = max(ss_total - ss_method - ss_unit, 0.0)
    df1, df2 = k - 1, (k - 1) * (n - 1)

    scale = max(ss_total, float(np.finfo(np.float64).tiny))
    no_effect = bool(ss_method <= ZERO_TOLERANCE * scale)
    no_error = bool(ss_error <= ZERO_TOLERANCE * scale)
    if no_effect:
        return AnovaResult(f=0.0, df_method=df1, df_error=df2, p=1.0, degenerate=no_error)
    if no_error:
        return AnovaResult(f=math.inf, df_method=df1, df_error=df2, p=0.0, degenerate=True)
    f = (ss_method / df1) / (ss_error / df2)
    return AnovaResult(f=f, df_method=df1, df_error=df2, p=f_survival(f, df1, df2))


def paired_t(a: np.ndarray, b: np.ndarray) -> tuple[float, float]:
    """Two-sided paired t-test; zero differences give (0, 1), constant ones (+-inf, 0)."""
    d = np.asarray(a, dtype=np.float64) - np.asarray(b, dtype=np.float64)
    scale = float(np.max(np.abs(d)))
    if scale == 0.0:
        return 0.0, 1.0
    if float(np.std(d)) <= ZERO_TOLERANCE * scale:
        return math.copysign(math.inf, float(d.mean())), 0.0
    result = stats.ttest_rel(a, b)
    return float(result.statistic), float(result.pvalue)


def bonferroni_pairwise(values: np.ndarray, names: Optional[Sequence[str]] = None) -> list[PairwiseResult]:
    """Paired t-test for every method pair, p multiplied by the number of pairs."""
    table = _check_table(values)
    k = table.shape[1]
    names = [str(i) for i in range(k)] if names is None else [str(n) for n in names]
    pairs = list(combinations(range(k), 2))
    results = []
    for i, j in pairs:
        t, p = paired_t(table[:, i], table[:, j])
        results.append(
            PairwiseResult(
                pair=(names[i], names[j]),
                t=t,
                p=p,
                p_corrected=min(1.0, p * len(pairs)),
                mean_difference=float(np.mean(table[:, i] - table[:, j])),
            )
        )
    return results

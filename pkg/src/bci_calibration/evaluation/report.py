"""Evaluation report: fold-level results, aggregates and method comparison."""

from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Iterable, Optional, Sequence

import numpy as np
from loguru import logger

from ..errors import CalibrationError, ErrorCode
from .cv import CrossValidationResult
from .metrics import RATE_NAMES
from .statistics import bonferroni_pairwise, rm_anova

REPORT_FORMAT = "bci-calibration-report/1"
TIMINGS_JSON = "timings.json"
AVERAGE_ROW = "Average"
FOLD_COLUMNS = ("session", "method", "fold", "acc", "tpr", "tnr", "fpr", "fnr")
SHORT_NAMES = {"accuracy": "acc"}


def format_mean_sd(values: Iterable[float], scale: float = 100.0) -> str:
    """``"65.2 ± 11.3"``: one decimal, sample SD, NaN entries ignored."""
    data = np.asarray([v for v in values if not math.isnan(v)], dtype=np.float64) * scale
    if data.size == 0:
        return "n/a"
    if data.size == 1:
        return f"{data[0]:.1f} ± n/a"
    return f"{data.mean():.1f} ± {data.std(ddof=1):.1f}"


def _num(value: float) -> str:
    return repr(float(value))


def _csv_text(header: Sequence[str], rows: Iterable[Sequence[Any]]) -> str:
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerow(header)
    writer.writerows(rows)
    return buffer.getvalue()


@dataclass
class EvalReport:
    """Cross-validation results for every (session, method), in run order.

    Aggregates are recomputed from the stored fold metrics.
    """
    results: list[CrossValidationResult]
    methods: list[str]
    stat_unit: str = "session"
    config: dict[str, Any] = field(default_factory=dict)
    failures: list[dict[str, Any]] = field(default_factory=list)

    def __post_init__(self) -> None:
        if self.stat_unit not in ("session", "subject"):
            raise CalibrationError(ErrorCode.CONFIGURATION_ERROR, "stat_unit must be 'session' or 'subject'",
                                   {"field": "stat_unit"})

    # Lookup

    def sessions(self) -> list[str]:
        return list(dict.fromkeys(r.session for r in self.results))

    def subject_of(self, session: str) -> str:
        for r in self.results:
            if r.session == session:
                return r.subject or session
        return session

    def subjects(self) -> list[str]:
        return list(dict.fromkeys(self.subject_of(s) for s in self.sessions()))

    def get(self, session: str, method: str) -> Optional[CrossValidationResult]:
        for r in self.results:
            if r.session == session and r.method == method:
                return r
        return None

    def complete_sessions(self) -> list[str]:
        """Sessions with a result for every method."""
        return [s for s in self.sessions() if all(self.get(s, m) is not None for m in self.methods)]

    # Aggregation

    def unit_matrix(self, metric: str = "accuracy", unit: Optional[str] = None) -> tuple[list[str], np.ndarray]:
        """[unit x method] of fold-mean values; subjects average their sessions."""
        unit = unit or self.stat_unit
        sessions = self.complete_sessions()
        table = np.array([[self.get(s, m).mean(metric) for m in self.methods] for s in sessions]).reshape(
            len(sessions), len(self.methods)
        )
        if unit == "session":
            return sessions, table
        subjects = list(dict.fromkeys(self.subject_of(s) for s in sessions))
        rows = [
            np.nanmean(table[[i for i, s in enumerate(sessions) if self.subject_of(s) == subj]], axis=0)
            for subj in subjects
        ]
        return subjects, np.array(rows).reshape(len(subjects), len(self.methods))

    def subject_values(self, subject: Optional[str], method: str, metric: str = "accuracy",
                       granularity: str = "session") -> list[float]:
        """Values behind one table cell; ``subject=None`` pools every subject.

        ``granularity="session"`` yields one fold-mean per session,
        ``"fold"`` yields every fold of every session.
        """
        values: list[float] = []
        for session in self.sessions():
            if subject is not None and self.subject_of(session) != subject:
                continue
            result = self.get(session, method)
            if result is None:
                continue
            if granularity == "fold":
                values.extend(float(v) for v in result.fold_values(metric))
            else:
                values.append(result.mean(metric))
        return values

    def accuracy_table(self, granularity: str = "session") -> list[list[str]]:
        """Rows = subjects plus the average row, columns = methods, percent mean ± SD."""
        rows = []
        for subject in [*self.subjects(), None]:
            label = AVERAGE_ROW if subject is None else subject
            rows.append([label] + [
                format_mean_sd(self.subject_values(subject, m, "accuracy", granularity)) for m in self.methods
            ])
        return rows

    def rates_table(self) -> list[list[str]]:
        """Rows = methods, columns = accuracy and the four rates over sessions."""
        return [
            [m] + [format_mean_sd(self.subject_values(None, m, metric)) for metric in RATE_NAMES]
            for m in self.methods
        ]

    def wins(self) -> dict[str, int]:
        """Subjects for which each method has the best mean accuracy (ties count for all)."""
        counts = {m: 0 for m in self.methods}
        for subject in self.subjects():
            means = {}
            for m in self.methods:
                values = [v for v in self.subject_values(subject, m) if not math.isnan(v)]
                means[m] = float(np.mean(values)) if values else -math.inf
            best = max(means.values())
            for m, value in means.items():
                if value == best and np.isfinite(value):
                    counts[m] += 1
        return counts

    def fit_ms(self) -> dict[str, float]:
        """Wall-clock fit time per method summed over sessions."""
        return {m: sum(r.fit_ms for r in self.results if r.method == m) for m in self.methods}

    def statistics(self, metrics: Sequence[str] = RATE_NAMES) -> dict[str, Any]:
        """rm-ANOVA and Bonferroni pairwise tests per metric; empty below 2 methods or units."""
        if len(self.methods) < 2:
            return {}
        out: dict[str, Any] = {}
        for metric in metrics:
            units, table = self.unit_matrix(metric)
            table = table[np.all(np.isfinite(table), axis=1)]
            if table.shape[0] < 2:
                continue
            out[metric] = {
                "unit": self.stat_unit,
                "n_units": int(table.shape[0]),
                "anova": rm_anova(table).to_dict(),
                "pairwise": [p.to_dict() for p in bonferroni_pairwise(table, self.methods)],
            }
        return out

    # Serialization

    def fold_rows(self) -> list[list[str]]:
        rows = []
        for r in self.results:
            for index, fold in enumerate(r.folds):
                rows.append([r.session, r.method, str(index)] + [_num(fold.rate(n)) for n in RATE_NAMES])
        return rows

    def session_rows(self) -> list[list[str]]:
        rows = []
        for r in self.results:
            rows.append([r.session, r.subject or r.session, r.method, str(len(r.folds))]
                        + [_num(r.mean(n)) for n in RATE_NAMES] + [_num(r.sd("accuracy"))])
        return rows

    def csv_documents(self) -> dict[str, str]:
        """File name -> CSV text, all deterministic."""
        return {
            "folds.csv": _csv_text(FOLD_COLUMNS, self.fold_rows()),
            "sessions.csv": _csv_text(
                ("session", "subject", "method", "folds", *[SHORT_NAMES.get(n, n) for n in RATE_NAMES], "acc_sd"),
                self.session_rows(),
            ),
            "table_accuracy.csv": _csv_text(("subject", *self.methods), self.accuracy_table("session")),
            "table_accuracy_folds.csv": _csv_text(("subject", *self.methods), self.accuracy_table("fold")),
            "table_rates.csv": _csv_text(("method", *[SHORT_NAMES.get(n, n) for n in RATE_NAMES]), self.rates_table()),
        }

    def to_dict(self) -> dict[str, Any]:
        return {
            "format": REPORT_FORMAT,
            "methods": list(self.methods),
            "stat_unit": self.stat_unit,
            "config": self.config,
            "results": [r.to_dict() for r in self.results],
            "wins": self.wins(),
            "statistics": self.statistics(),
            "failures": self.failures,
            "notes": ["no sphericity correction applied to the repeated-measures ANOVA"],
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True, allow_nan=True) + "\n"

    def timings(self) -> dict[str, Any]:
        """Wall-clock fit times per (session, method); varies between runs."""
        return {"fit_ms": [{"session": r.session, "method": r.method, "fit_ms": r.fit_ms} for r in self.results]}

    def apply_timings(self, data: dict[str, Any]) -> None:
        by_run = {(e["session"], e["method"]): float(e["fit_ms"]) for e in data.get("fit_ms", [])}
        for r in self.results:
            r.fit_ms = by_run.get((r.session, r.method), r.fit_ms)

    @classmethod
    def from_dict(cls, data: dict[str, Any]) -> "EvalReport":
        if data.get("format") != REPORT_FORMAT:
            raise CalibrationError(ErrorCode.MODEL_FORMAT, "unsupported report format",
                                   {"format": data.get("format"), "expected": REPORT_FORMAT})
        return cls(
            results=[CrossValidationResult.from_dict(r) for r in data["results"]],
            methods=list(data["methods"]),
            stat_unit=data.get("stat_unit", "session"),
            config=dict(data.get("config", {})),
            failures=list(data.get("failures", [])),
        )

    @classmethod
    def load(cls, path: str | Path) -> "EvalReport":
        source = Path(path)
        try:
            data = json.loads(source.read_text(encoding="utf-8"))
        except (OSError, json.JSONDecodeError) as exc:
            raise CalibrationError(ErrorCode.MODEL_FORMAT, f"cannot read report: {exc}", {"path": str(source)}) from exc
        report = cls.from_dict(data)
        sidecar = source.with_name(TIMINGS_JSON)
        if sidecar.exists():
            try:
                report.apply_timings(json.loads(sidecar.read_text(encoding="utf-8")))
            except (OSError, ValueError, KeyError, TypeError) as exc:
                logger.warning("ignoring unreadable {}: {}", sidecar, exc)
        return report


def merge_reports(reports: Sequence[EvalReport], stat_unit: Optional[str] = None) -> EvalReport:
    """Combine reports (e.g. one per method) that cover the same sessions."""
    if not reports:
        raise CalibrationError(ErrorCode.INSUFFICIENT_DATA, "no reports to merge")
    methods: list[str] = []
    results: list[CrossValidationResult] = []
    seen: set[tuple[str, str]] = set()
    for report in reports:
        for r in report.results:
            if (r.session, r.method) in seen:
                continue
            seen.add((r.session, r.method))
            results.append(r)
        methods.extend(m for m in report.methods if m not in methods)
    merged = EvalReport(results=results, methods=methods, stat_unit=stat_unit or reports[0].stat_unit,
                        config=reports[0].config)
    session_sets = {m: {r.session for r in results if r.method == m} for m in methods}
    reference = session_sets[methods[0]]
    mismatched = {m: sorted(s ^ reference) for m, s in session_sets.items() if s != reference}
    if mismatched:
        raise CalibrationError(ErrorCode.SESSION_MISMATCH, "methods cover different session sets", mismatched)
    return merged

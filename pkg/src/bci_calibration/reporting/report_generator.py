"""Human-readable and machine-readable renderings of an evaluation report.

Everything except the footer line of the markdown document and the
``timings.json`` sidecar is a pure function of the stored fold metrics, so
two runs with the same seed write byte-identical files apart from those.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from datetime import datetime
from enum import Enum
from pathlib import Path
from typing import Any, Optional, Sequence

from loguru import logger

from ..errors import CalibrationError, ErrorCode
from ..evaluation.metrics import RATE_NAMES
from ..evaluation.report import TIMINGS_JSON, EvalReport

REPORT_JSON = "report.json"
REPORT_MARKDOWN = "report.md"
STATISTICS_JSON = "statistics.json"


class ReportFormat(Enum):
    """Supported output formats."""
    MARKDOWN = "markdown"
    JSON = "json"


@dataclass
class ReportSection:
    """A single section within a report."""
    title: str
    content: str
    level: int = 2
    metadata: dict[str, Any] = field(default_factory=dict)

    def to_dict(self) -> dict[str, Any]:
        return {
            "title": self.title,
            "content": self.content,
            "level": self.level,
            "metadata": self.metadata,
        }


@dataclass
class Report:
    """Rendered report: ordered sections plus a single volatile footer."""
    title: str
    sections: list[ReportSection] = field(default_factory=list)
    footer: str = ""
    metadata: dict[str, Any] = field(default_factory=dict)

    def add_section(self, title: str, content: str, level: int = 2, **metadata: Any) -> ReportSection:
        section = ReportSection(title=title, content=content, level=level, metadata=metadata)
        self.sections.append(section)
        return section

    def to_dict(self) -> dict[str, Any]:
        return {
            "title": self.title,
            "sections": [s.to_dict() for s in self.sections],
            "metadata": self.metadata,
        }


def markdown_table(header: Sequence[str], rows: Sequence[Sequence[Any]]) -> str:
    lines = [
        "| " + " | ".join(str(h) for h in header) + " |",
        "|" + "|".join("---" for _ in header) + "|",
    ]
    lines.extend("| " + " | ".join(str(c) for c in row) + " |" for row in rows)
    return "\n".join(lines)


def text_table(header: Sequence[str], rows: Sequence[Sequence[Any]]) -> str:
    """Column-aligned plain text, used for terminal output."""
    cells = [[str(c) for c in header]] + [[str(c) for c in row] for row in rows]
    widths = [max(len(row[i]) for row in cells) for i in range(len(header))]
    lines = ["  ".join(c.ljust(w) for c, w in zip(row, widths)).rstrip() for row in cells]
    lines.insert(1, "  ".join("-" * w for w in widths))
    return "\n".join(lines)


def _p_value(value: float) -> str:
    if math.isnan(value):
        return "n/a"
    return f"{value:.4g}"


class ReportGenerator:
    """Builds and formats evaluation reports."""

    def __init__(self) -> None:
        self._formatters = {
            ReportFormat.MARKDOWN: self._format_markdown,
            ReportFormat.JSON: self._format_json,
        }

    def create_evaluation_report(
        self,
        report: EvalReport,
        created_at: Optional[datetime] = None,
        title: str = "Motor-imagery calibration comparison",
    ) -> Report:
        """Accuracy table at both granularities, rate summary, wins and statistics."""
        methods = list(report.methods)
        out = Report(
            title=title,
            metadata={
                "methods": ", ".join(methods),
                "sessions": len(report.sessions()),
                "subjects": len(report.subjects()),
                "stat_unit": report.stat_unit,
            },
        )
        out.add_section(
            "Classification accuracy (%), across sessions",
            markdown_table(("Subject", *methods), report.accuracy_table("session")),
        )
        out.add_section(
            "Classification accuracy (%), across folds",
            markdown_table(("Subject", *methods), report.accuracy_table("fold")),
        )
        out.add_section(
            "Performance rates (%)",
            markdown_table(("Method", *RATE_NAMES), report.rates_table()),
        )
        wins = report.wins()
        out.add_section(
            "Best method per subject",
            markdown_table(("Method", "Subjects"), [(m, wins[m]) for m in methods]),
        )

        statistics = report.statistics()
        if statistics:
            out.add_section("Statistics", self._statistics_markdown(statistics), unit=report.stat_unit)
        else:
            out.add_section("Statistics", "Not computed: at least two methods and two units are required.")

        if report.failures:
            rows = [(f.get("session", ""), f.get("method", ""), f.get("error", "")) for f in report.failures]
            out.add_section("Failures", markdown_table(("Session", "Method", "Error"), rows))

        out.add_section("Notes", "No sphericity correction is applied to the repeated-measures ANOVA.")

        fit_ms = report.fit_ms()
        timings = ", ".join(f"{m} {fit_ms[m] / 1000.0:.1f} s" for m in methods)
        stamp = (created_at or datetime.now()).strftime("%Y-%m-%d %H:%M:%S")
        out.footer = f"Generated {stamp}; fit time {timings}"
        return out

    def _statistics_markdown(self, statistics: dict[str, Any]) -> str:
        blocks = []
        for metric, entry in statistics.items():
            anova = entry["anova"]
            flag = " (degenerate)" if anova["degenerate"] else ""
            blocks.append(
                f"**{metric}** ({entry['n_units']} {entry['unit']}s): "
                f"F({anova['df_method']}, {anova['df_error']}) = {anova['f']:.4g}, "
                f"p = {_p_value(anova['p'])}{flag}"
            )
            rows = [
                (" vs ".join(p["pair"]), f"{p['t']:.4g}", _p_value(p["p"]), _p_value(p["p_corrected"]))
                for p in entry["pairwise"]
            ]
            blocks.append(markdown_table(("Pair", "t", "p", "p (Bonferroni)"), rows))
        return "\n\n".join(blocks)

    def generate(self, report: Report, output_format: ReportFormat) -> str:
        """Render ``report`` in the given format."""
        formatter = self._formatters.get(output_format)
        if not formatter:
            raise CalibrationError(ErrorCode.CONFIGURATION_ERROR, f"unsupported format: {output_format}")
        return formatter(report)

    def _format_markdown(self, report: Report) -> str:
        lines = [f"# {report.title}", ""]
        if report.metadata:
            for key, value in report.metadata.items():
                lines.append(f"- **{key}**: {value}")
            lines.append("")
        for section in report.sections:
            lines.append(f"{'#' * section.level} {section.title}")
            lines.append("")
            lines.append(section.content)
            lines.append("")
        if report.footer:
            lines.append("---")
            lines.append(f"*{report.footer}*")
        return "\n".join(lines) + "\n"

    def _format_json(self, report: Report) -> str:
        return json.dumps(report.to_dict(), ensure_ascii=False, indent=2, sort_keys=True) + "\n"


def write_statistics(report: EvalReport, out_dir: str | Path) -> Path:
    target = Path(out_dir) / STATISTICS_JSON
    target.parent.mkdir(parents=True, exist_ok=True)
    payload = {"stat_unit": report.stat_unit, "methods": report.methods, "statistics": report.statistics()}
    target.write_text(json.dumps(payload, indent=2, sort_keys=True) + "\n", encoding="utf-8")
    return target


def write_report(
    report: EvalReport,
    out_dir: str | Path,
    created_at: Optional[datetime] = None,
) -> dict[str, Path]:
    """Write the CSV tables, the full-precision JSON document and the markdown summary."""
    root = Path(out_dir)
    root.mkdir(parents=True, exist_ok=True)
    written: dict[str, Path] = {}
    for name, text in report.csv_documents().items():
        path = root / name
        path.write_text(text, encoding="utf-8")
        written[name] = path

    json_path = root / REPORT_JSON
    json_path.write_text(report.to_json(), encoding="utf-8")
    written[REPORT_JSON] = json_path

    timings_path = root / TIMINGS_JSON
    timings_path.write_text(json.dumps(report.timings(), indent=2, sort_keys=True) + "\n", encoding="utf-8")
    written[TIMINGS_JSON] = timings_path

    generator = ReportGenerator()
    rendered = generator.generate(generator.create_evaluation_report(report, created_at), ReportFormat.MARKDOWN)
    md_path = root / REPORT_MARKDOWN
    md_path.write_text(rendered, encoding="utf-8")
    written[REPORT_MARKDOWN] = md_path

    logger.info("wrote {} report files to {}", len(written), root)
    return written

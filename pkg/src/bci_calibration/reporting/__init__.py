from .report_generator import (
    REPORT_JSON,
    REPORT_MARKDOWN,
    STATISTICS_JSON,
    Report,
    ReportFormat,
    ReportGenerator,
    ReportSection,
    markdown_table,
    text_table,
    write_report,
    write_statistics,
)

__all__ = [
    "REPORT_JSON",
    "REPORT_MARKDOWN",
    "STATISTICS_JSON",
    "Report",
    "ReportFormat",
    "ReportGenerator",
    "ReportSection",
    "markdown_table",
    "text_table",
    "write_report",
    "write_statistics",
]

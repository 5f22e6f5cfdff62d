"""Report compilation and chart rendering."""

from .charts import (
    PLACEHOLDER_MESSAGE,
    ChartSpec,
    format_number,
    render_chart,
    render_svg,
    spec_from_result,
)
from .report import (
    AnalysisSection,
    ReportDocument,
    build_report,
    fallback_report,
    results_table_text,
    serialize_outcomes,
    split_sections,
)

__all__ = [
    "AnalysisSection",
    "ChartSpec",
    "PLACEHOLDER_MESSAGE",
    "ReportDocument",
    "build_report",
    "fallback_report",
    "format_number",
    "render_chart",
    "render_svg",
    "results_table_text",
    "serialize_outcomes",
    "spec_from_result",
    "split_sections",
]

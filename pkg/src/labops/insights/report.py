"""Narrative report assembly.

The report carries four sections (Introduction, Analysis per question,
Recommendations, Conclusion). Result tables are always computed
deterministically from the actual query output; the model's prose is
attached around them, and a gateway failure or an unparseable response
degrades to a deterministic fallback report.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from decimal import Decimal
from typing import TYPE_CHECKING, Optional, Sequence

from ..llm.backends import GatewayError
from ..llm.prompts import PromptContext, render_prompt
from ..schema import JOBS_SCHEMA, ResultSet
from .charts import format_number

if TYPE_CHECKING:  # structural use only; avoids a runtime import cycle
    from ..pipeline.state import QuestionOutcome

SECTION_HEADINGS = ("Introduction", "Analysis", "Recommendations", "Conclusion")

_FALLBACK_RECOMMENDATIONS = (
    "Review scheduling for the states with the longest creation-to-start delays.",
    "Standardize protocols for the workflows showing elevated error volumes.",
    "Audit equipment and instrument software on the highest-error workflow.",
    "Add data-quality checks so timestamp fields are populated consistently.",
    "Re-run this analysis after each intervention to confirm the bottleneck shrinks.",
)


@dataclass(frozen=True)
class AnalysisSection:
    question: str
    results_table: str
    insight: str
    plot_reference: Optional[str] = None
    failure_note: Optional[str] = None


@dataclass(frozen=True)
class ReportDocument:
    introduction: str
    analyses: tuple[AnalysisSection, ...]
    recommendations: tuple[str, ...]
    conclusion: str
    fallback: bool = False

    def __post_init__(self) -> None:
        if len(self.recommendations) != 5:
            raise ValueError("a report carries exactly 5 recommendations")

    def render_text(self) -> str:
        """Plain-text document, no markdown."""
        lines: list[str] = ["Introduction", "", self.introduction.strip(), "", "Analysis", ""]
        for i, section in enumerate(self.analyses, start=1):
            lines.append(f"Question {i}: {section.question}")
            lines.append("Results:")
            lines.append(section.results_table.rstrip())
            lines.append(f"Insight: {section.insight.strip()}")
            if section.plot_reference:
                lines.append(f"Plot: {section.plot_reference}")
            elif section.failure_note:
                lines.append(f"Note: {section.failure_note}")
            lines.append("")
        lines.append("Recommendations")
        lines.append("")
        for i, rec in enumerate(self.recommendations, start=1):
            lines.append(f"{i}. {rec}")
        lines.extend(["", "Conclusion", "", self.conclusion.strip(), ""])
        return "\n".join(lines)


def results_table_text(result: ResultSet) -> str:
    """Deterministic fixed-order table: header row plus ' | '-joined values."""
    header = " | ".join(result.column_names)
    lines = [header]
    for row in result.rows:
        cells = []
        for value in row:
            if value is None:
                cells.append("NULL")
            elif isinstance(value, Decimal):
                cells.append(format_number(value))
            else:
                cells.append(str(value))
        lines.append(" | ".join(cells))
    if not result.rows:
        lines.append("(no rows)")
    return "\n".join(lines)


def serialize_outcomes(outcomes: Sequence["QuestionOutcome"]) -> str:
    """The {queries_results} block: question, columns, and data per query."""
    blocks = []
    for i, outcome in enumerate(outcomes, start=1):
        lines = [f"Query {i}: {outcome.question.text}"]
        if outcome.result is not None:
            lines.append(results_table_text(outcome.result))
        else:
            reason = outcome.error_trail[-1] if outcome.error_trail else "unknown error"
            lines.append(f"(failed after {outcome.attempts} attempts: {reason})")
        blocks.append("\n".join(lines))
    return "\n\n".join(blocks)


def build_report(
    outcomes: Sequence["QuestionOutcome"],
    gateway,
    output_dir: str,
    chart_format: str = "svg",
) -> ReportDocument:
    """Render the report prompt, call the gateway, and assemble the document."""
    prompt = render_prompt(
        "report",
        PromptContext(
            table_schema=JOBS_SCHEMA.to_prompt_text(),
            queries_results=serialize_outcomes(outcomes),
            output_dir=output_dir,
        ),
    )
    if chart_format != "png":
        # Plot references must match the files actually written.
        prompt = re.sub(r"(plot_query_[X\d]+)\.png", rf"\1.{chart_format}", prompt)

    try:
        response = gateway.complete_role("report", prompt)
        sections = split_sections(response)
    except (GatewayError, ValueError):
        sections = None

    if sections is None:
        return fallback_report(outcomes, output_dir, chart_format)

    recommendations = parse_recommendation_list(sections["Recommendations"])
    if len(recommendations) > 5:
        recommendations = recommendations[:5]
    while len(recommendations) < 5:
        recommendations.append(_FALLBACK_RECOMMENDATIONS[len(recommendations)])

    analysis_text = sections["Analysis"]
    analyses = tuple(
        _analysis_for(outcome, analysis_text, output_dir, chart_format) for outcome in outcomes
    )
    return ReportDocument(
        introduction=sections["Introduction"].strip(),
        analyses=analyses,
        recommendations=tuple(recommendations),
        conclusion=sections["Conclusion"].strip(),
    )


def split_sections(text: str) -> Optional[dict[str, str]]:
    """Segment a response on the literal section headings; None if any is absent."""
    positions = []
    for heading in SECTION_HEADINGS:
        match = re.search(rf"^\s*{heading}\b.*$", text, flags=re.MULTILINE | re.IGNORECASE)
        if match is None:
            return None
        positions.append((match.start(), match.end(), heading))
    if positions != sorted(positions):
        return None
    sections = {}
    for i, (start, end, heading) in enumerate(positions):
        stop = positions[i + 1][0] if i + 1 < len(positions) else len(text)
        sections[heading] = text[end:stop].strip()
    return sections


_BULLET_RE = re.compile(r"^\s*(?:\d+[.)]|[-*•])\s+(.*\S)\s*$")


def parse_recommendation_list(text: str) -> list[str]:
    items = []
    for line in text.splitlines():
        match = _BULLET_RE.match(line)
        if match:
            items.append(match.group(1))
    if not items:
        items = [line.strip() for line in text.splitlines() if line.strip()]
    return items


def _analysis_for(
    outcome: "QuestionOutcome", analysis_text: str, output_dir: str, chart_format: str
) -> AnalysisSection:
    question = outcome.question.text
    insight = _segment_for_question(analysis_text, question) or _generic_insight(outcome)
    if outcome.status == "succeeded":
        table = results_table_text(outcome.result)
        plot_ref = None
        if outcome.question.chart_hint != "none":
            plot_ref = f"{output_dir}/plot_query_{outcome.question.index + 1}.{chart_format}"
        return AnalysisSection(
            question=question, results_table=table, insight=insight, plot_reference=plot_ref
        )
    reason = outcome.error_trail[-1] if outcome.error_trail else "unknown error"
    return AnalysisSection(
        question=question,
        results_table="(no rows)",
        insight=insight,
        failure_note=(
            f"No plot was generated due to errors; the query failed after "
            f"{outcome.attempts} attempts ({reason})."
        ),
    )


def _segment_for_question(analysis_text: str, question: str) -> Optional[str]:
    """Prose between this question's mention and the next question mention."""
    idx = analysis_text.find(question)
    if idx == -1:
        return None
    rest = analysis_text[idx + len(question) :]
    next_q = re.search(r"^\s*(?:Query|Question)\s+\d+", rest, flags=re.MULTILINE)
    segment = rest[: next_q.start()] if next_q else rest
    segment = segment.strip().strip(":").strip()
    return segment or None


def _generic_insight(outcome: "QuestionOutcome") -> str:
    if outcome.status != "succeeded":
        return "The question could not be answered; see the note below for the failure trail."
    result = outcome.result
    if result is None or not result.rows:
        return "The query returned no rows; either no data matches or the filters are too strict."
    return (
        f"The query returned {len(result.rows)} rows across columns "
        f"{', '.join(result.column_names)}; compare the extremes to spot the bottleneck."
    )


def fallback_report(
    outcomes: Sequence["QuestionOutcome"], output_dir: str, chart_format: str
) -> ReportDocument:
    """Deterministic report used when the model path fails."""
    succeeded = sum(1 for o in outcomes if o.status == "succeeded")
    intro = (
        "This report summarizes operational bottlenecks found in the jobs table, which tracks "
        "lab job workflows with states, execution records, logs, and timestamps. "
        f"{succeeded} of {len(outcomes)} analytical questions produced results. "
        "It was assembled by the deterministic fallback path because the narrative model "
        "was unavailable."
    )
    analyses = tuple(
        _analysis_for(outcome, "", output_dir, chart_format) for outcome in outcomes
    )
    conclusion = (
        "Address the slowest states and the highest-error workflow first; both concentrate "
        "delay and rework. Re-run the pipeline after changes to verify improvements."
    )
    return ReportDocument(
        introduction=intro,
        analyses=analyses,
        recommendations=_FALLBACK_RECOMMENDATIONS,
        conclusion=conclusion,
        fallback=True,
    )

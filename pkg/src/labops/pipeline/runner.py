"""Whole-graph execution: questions in, report and chart files out.

Sequencing: question creation, then per question a builder/validator
loop with at most max_retries reflections, then summarization and
charting. Retries are capped and the cursor only advances, so every run
terminates; per-question failures are recorded, never fatal.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path

from ..dataset import DatasetError, load_dataset
from ..insights.charts import ChartSpec, render_chart, spec_from_result
from ..insights.report import ReportDocument, build_report
from ..llm.gateway import Gateway
from ..schema import JOBS_SCHEMA
from ..store import Datastore
from . import nodes
from .state import FAILED, SUCCEEDED, AgentState, PipelineConfig, QuestionOutcome


class PipelineFatalError(RuntimeError):
    """Nothing useful can be produced (dataset or question list unavailable)."""


@dataclass
class PipelineResult:
    report: ReportDocument
    outcomes: list[QuestionOutcome]
    charts: list[ChartSpec]
    report_path: Path
    chart_paths: list[Path] = field(default_factory=list)
    node_invocations: int = 0


def run_pipeline(config: PipelineConfig, gateway: Gateway) -> PipelineResult:
    try:
        records = load_dataset(config.dataset_path)
    except DatasetError as exc:
        raise PipelineFatalError(f"cannot load dataset: {exc}") from exc
    datastore = Datastore(records, JOBS_SCHEMA)
    state = AgentState(schema_text=JOBS_SCHEMA.to_prompt_text())
    invocations = 0

    invocations += 1
    try:
        nodes.node_question_creation(state, gateway, config.num_questions)
    except nodes.QuestionCreationFailed as exc:
        raise PipelineFatalError(str(exc)) from exc

    while state.cursor < len(state.questions):
        route = nodes.ROUTE_RETRY
        while route == nodes.ROUTE_RETRY:
            invocations += 1  # builder (includes the reflect call on retries)
            if state.retry_count > 0:
                invocations += 1
            nodes.node_query_builder(state, gateway)
            invocations += 1
            validation = nodes.node_query_validator(
                state, datastore, gateway, llm_code_check=config.llm_code_check
            )
            route = nodes.route_after_validation(state, validation, config.max_retries)

        question = state.current_question
        attempts = state.retry_count + 1
        if route == nodes.ROUTE_PROCEED:
            outcome = QuestionOutcome(
                question=question,
                status=SUCCEEDED,
                attempts=attempts,
                final_sql=state.current_sql,
                result=state.current_result,
                error_trail=tuple(state.error_trail),
                reflection_notes=tuple(state.reflection_notes),
            )
        else:
            outcome = QuestionOutcome(
                question=question,
                status=FAILED,
                attempts=attempts,
                error_trail=tuple(state.error_trail),
                reflection_notes=tuple(state.reflection_notes),
            )
        state.outcomes.append(outcome)
        nodes.node_question_navigator(state)

    config.output_dir.mkdir(parents=True, exist_ok=True)
    invocations += 1
    report = build_report(
        state.outcomes, gateway, str(config.output_dir), chart_format=config.chart_format
    )
    state.report = report
    report_path = config.output_dir / "report.txt"
    report_path.write_text(report.render_text(), encoding="utf-8")

    invocations += 1
    chart_paths: list[Path] = []
    for outcome in state.outcomes:
        if outcome.status != SUCCEEDED or outcome.question.chart_hint == "none":
            continue
        filename = f"plot_query_{outcome.question.index + 1}.{config.chart_format}"
        spec = spec_from_result(outcome.question.display_text, outcome.result, filename=filename)
        state.charts.append(spec)
        chart_paths.append(render_chart(spec, config.output_dir / filename))

    return PipelineResult(
        report=report,
        outcomes=state.outcomes,
        charts=state.charts,
        report_path=report_path,
        chart_paths=chart_paths,
        node_invocations=invocations,
    )

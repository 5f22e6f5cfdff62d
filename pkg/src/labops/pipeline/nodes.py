"""Agent-graph nodes and routers.

Each node mutates the shared AgentState; routers return plain route
strings. Conditional routing after validation drives the bounded
reflect-and-retry loop.
"""

from __future__ import annotations

from ..engine import ExecutionError
from ..llm.backends import GatewayError
from ..llm.extract import ExtractionError, NoSelectFound, extract_json_array, extract_json_object, extract_sql
from ..llm.gateway import Gateway
from ..llm.prompts import PromptContext, render_prompt
from ..schema import JOBS_SCHEMA
from ..sql import ParseError, lint, parse
from ..store import Datastore
from .state import AgentState, Question

ROUTE_OK = "ok"
ROUTE_ERROR = "error"
ROUTE_RETRY = "retry"
ROUTE_GIVE_UP = "give_up"
ROUTE_PROCEED = "proceed"
ROUTE_NEXT_QUESTION = "next_question"
ROUTE_SUMMARIZE = "summarize"


class QuestionCreationFailed(RuntimeError):
    """The run cannot proceed without a question list."""


def node_question_creation(state: AgentState, gateway: Gateway, num_questions: int) -> None:
    if state.questions:
        raise RuntimeError("question creation ran twice (router bug)")
    prompt = render_prompt(
        "question_creation",
        PromptContext(table_schema=state.schema_text, num_questions=num_questions),
    )
    try:
        raw = gateway.complete_role("question_creation", prompt)
        texts = extract_json_array(raw)
    except (GatewayError, ExtractionError) as exc:
        raise QuestionCreationFailed(f"question creation failed: {exc}") from exc
    if not texts:
        raise QuestionCreationFailed("question creation returned an empty list")
    state.questions = [Question.from_text(text, i) for i, text in enumerate(texts)]
    state.cursor = 0


def node_query_builder(state: AgentState, gateway: Gateway) -> None:
    if state.cursor >= len(state.questions):
        raise RuntimeError("query builder ran past the last question (router bug)")
    question = state.current_question
    prompt = render_prompt(
        "query_builder",
        PromptContext(table_schema=state.schema_text, question=question.text),
    )
    if state.retry_count > 0:
        guidance = node_reflect(state, gateway)
        prompt = (
            f"{prompt}\n\nA previous attempt produced this query:\n{state.current_sql or '(none)'}"
            f"\n\nIt failed with these errors:\n" + "\n".join(state.current_errors) +
            f"\n\nGuidance for the corrected query:\n{guidance}\n"
        )
    state.current_errors = []
    state.current_suggestions = []
    try:
        raw = gateway.complete_role("query_builder", prompt)
        state.current_sql = extract_sql(raw)
    except NoSelectFound as exc:
        state.current_sql = None
        state.current_errors = [str(exc)]
    except GatewayError as exc:
        state.current_sql = None
        state.current_errors = [f"query generation failed: {exc}"]


def node_reflect(state: AgentState, gateway: Gateway) -> str:
    if not state.current_errors:
        raise RuntimeError("reflect requires recorded errors (router bug)")
    prompt = render_prompt(
        "reflect",
        PromptContext(
            code=state.current_sql or "(no query was produced)",
            errors="\n".join(state.current_errors),
            table_schema=state.schema_text,
        ),
    )
    try:
        guidance = gateway.complete_role("reflect", prompt).strip()
    except GatewayError:
        # Deterministic fallback: reuse the linter's own suggestions.
        guidance = "; ".join(state.current_suggestions) or "; ".join(state.current_errors)
    state.reflection_notes.append(guidance)
    return guidance


def node_query_validator(
    state: AgentState,
    datastore: Datastore,
    gateway: Gateway | None = None,
    llm_code_check: bool = True,
) -> str:
    if state.current_sql is None:
        if not state.current_errors:
            state.current_errors = ["no SQL query to validate"]
        state.error_trail.extend(state.current_errors)
        return ROUTE_ERROR

    try:
        ast = parse(state.current_sql)
    except ParseError as exc:
        state.current_errors = [f"syntax error: {exc}"]
        state.error_trail.extend(state.current_errors)
        return ROUTE_ERROR

    report = lint(ast, datastore.schema)
    if not report.is_valid:
        state.current_errors = list(report.errors)
        state.current_suggestions = list(report.suggestions)
        state.error_trail.extend(state.current_errors)
        return ROUTE_ERROR

    if llm_code_check and gateway is not None:
        _run_code_check(state, gateway)

    try:
        state.current_result = datastore.execute(ast)
    except ExecutionError as exc:
        state.current_errors = [exc.message]
        state.error_trail.extend(state.current_errors)
        return ROUTE_ERROR
    return ROUTE_OK


def _run_code_check(state: AgentState, gateway: Gateway) -> None:
    """Advisory pass: the deterministic lint already accepted the query, so
    the model may only contribute extra suggestions, never a veto."""
    prompt = render_prompt(
        "code_check",
        PromptContext(code=state.current_sql, question=state.current_question.text),
    )
    try:
        raw = gateway.complete_role("code_check", prompt)
        verdict = extract_json_object(raw)
    except (GatewayError, ExtractionError):
        return
    for suggestion in verdict.suggestions:
        if suggestion not in state.current_suggestions:
            state.current_suggestions.append(suggestion)


def route_after_validation(state: AgentState, route: str, max_retries: int) -> str:
    if route == ROUTE_OK:
        return ROUTE_PROCEED
    if state.retry_count < max_retries:
        state.retry_count += 1
        return ROUTE_RETRY
    return ROUTE_GIVE_UP


def node_question_navigator(state: AgentState) -> str:
    if len(state.outcomes) != state.cursor + 1:
        raise RuntimeError("navigator ran before an outcome was recorded (router bug)")
    state.reset_question_scratch()
    state.cursor += 1
    if state.cursor < len(state.questions):
        return ROUTE_NEXT_QUESTION
    return ROUTE_SUMMARIZE

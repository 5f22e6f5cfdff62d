"""The agent graph: state, nodes, conditional routing, and the runner."""

from .nodes import (
    ROUTE_ERROR,
    ROUTE_GIVE_UP,
    ROUTE_NEXT_QUESTION,
    ROUTE_OK,
    ROUTE_PROCEED,
    ROUTE_RETRY,
    ROUTE_SUMMARIZE,
    QuestionCreationFailed,
    node_query_builder,
    node_query_validator,
    node_question_creation,
    node_question_navigator,
    node_reflect,
    route_after_validation,
)
from .runner import PipelineFatalError, PipelineResult, run_pipeline
from .state import (
    FAILED,
    SUCCEEDED,
    AgentState,
    PipelineConfig,
    Question,
    QuestionOutcome,
    parse_chart_hint,
    strip_chart_hint,
)

__all__ = [
    "AgentState",
    "FAILED",
    "PipelineConfig",
    "PipelineFatalError",
    "PipelineResult",
    "Question",
    "QuestionCreationFailed",
    "QuestionOutcome",
    "ROUTE_ERROR",
    "ROUTE_GIVE_UP",
    "ROUTE_NEXT_QUESTION",
    "ROUTE_OK",
    "ROUTE_PROCEED",
    "ROUTE_RETRY",
    "ROUTE_SUMMARIZE",
    "SUCCEEDED",
    "node_query_builder",
    "node_query_validator",
    "node_question_creation",
    "node_question_navigator",
    "node_reflect",
    "parse_chart_hint",
    "route_after_validation",
    "run_pipeline",
    "strip_chart_hint",
]

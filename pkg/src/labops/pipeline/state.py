"""Shared pipeline state threaded through the agent graph."""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from pathlib import Path
from typing import TYPE_CHECKING, Optional

from ..llm.config import RoleModelConfig, default_role_configs
from ..schema import ResultSet

if TYPE_CHECKING:
    from ..insights.charts import ChartSpec
    from ..insights.report import ReportDocument

SUCCEEDED = "succeeded"
FAILED = "failed"

_HINT_RE = re.compile(r"\(\s*suitable\s+for\s+(?:an?\s+)?(\w+)[^)]*chart\s*\)\s*\.?\s*$", re.IGNORECASE)


def parse_chart_hint(text: str) -> str:
    """'bar' / 'line' from a trailing '(Suitable for ... chart)' clause, else 'none'."""
    match = _HINT_RE.search(text)
    if match and match.group(1).lower() in ("bar", "line"):
        return match.group(1).lower()
    return "none"


def strip_chart_hint(text: str) -> str:
    return _HINT_RE.sub("", text).strip()


@dataclass(frozen=True)
class Question:
    text: str
    chart_hint: str
    index: int

    @classmethod
    def from_text(cls, text: str, index: int) -> "Question":
        return cls(text=text.strip(), chart_hint=parse_chart_hint(text), index=index)

    @property
    def display_text(self) -> str:
        return strip_chart_hint(self.text)


@dataclass(frozen=True)
class QuestionOutcome:
    question: Question
    status: str  # SUCCEEDED | FAILED
    attempts: int
    final_sql: Optional[str] = None
    result: Optional[ResultSet] = None
    error_trail: tuple[str, ...] = ()
    reflection_notes: tuple[str, ...] = ()

    def __post_init__(self) -> None:
        succeeded = self.status == SUCCEEDED
        if succeeded != (self.result is not None) or succeeded != (self.final_sql is not None):
            raise ValueError("status, result, and final_sql must agree")


@dataclass
class AgentState:
    """Mutable working state; one instance per pipeline run."""

    schema_text: str
    questions: list[Question] = field(default_factory=list)
    cursor: int = 0
    current_sql: Optional[str] = None
    current_errors: list[str] = field(default_factory=list)
    current_suggestions: list[str] = field(default_factory=list)
    current_result: Optional[ResultSet] = None
    retry_count: int = 0
    error_trail: list[str] = field(default_factory=list)
    reflection_notes: list[str] = field(default_factory=list)
    outcomes: list[QuestionOutcome] = field(default_factory=list)
    report: Optional["ReportDocument"] = None
    charts: list["ChartSpec"] = field(default_factory=list)

    @property
    def current_question(self) -> Question:
        return self.questions[self.cursor]

    def reset_question_scratch(self) -> None:
        self.current_sql = None
        self.current_errors = []
        self.current_suggestions = []
        self.current_result = None
        self.retry_count = 0
        self.error_trail = []
        self.reflection_notes = []


@dataclass
class PipelineConfig:
    dataset_path: Path
    output_dir: Path
    num_questions: int = 5
    max_retries: int = 3
    chart_format: str = "svg"  # svg | png
    llm_code_check: bool = True
    role_configs: dict[str, RoleModelConfig] = field(default_factory=default_role_configs)

    def __post_init__(self) -> None:
        self.dataset_path = Path(self.dataset_path)
        self.output_dir = Path(self.output_dir)
        if self.num_questions < 1:
            raise ValueError("num_questions must be at least 1")
        if self.max_retries < 0:
            raise ValueError("max_retries cannot be negative")
        if self.chart_format not in ("svg", "png"):
            raise ValueError("chart_format must be svg or png")

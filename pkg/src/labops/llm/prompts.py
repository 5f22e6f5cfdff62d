"""Prompt templates and their placeholder interpolation.

Templates live as plain-text assets and are loaded once per process.
Substitution touches only the declared placeholders, so literal braces
inside template examples (JSON snippets, code) survive untouched.
"""

from __future__ import annotations

from dataclasses import dataclass
from importlib import resources
from typing import Optional

from .config import ROLES

#: Placeholders each role's template consumes.
ROLE_PLACEHOLDERS = {
    "question_creation": ("table_schema", "num_questions"),
    "query_builder": ("table_schema", "question"),
    "code_check": ("code", "question"),
    "reflect": ("code", "errors", "table_schema"),
    "report": ("table_schema", "queries_results", "output_dir"),
    "chart": ("data", "plot_filename"),
}


class MissingPlaceholder(ValueError):
    def __init__(self, role: str, name: str):
        super().__init__(f"template for role {role!r} needs {name!r} in the context")
        self.role = role
        self.name = name


@dataclass(frozen=True)
class PromptContext:
    """Values available for substitution; roles use the subset they declare."""

    table_schema: Optional[str] = None
    num_questions: Optional[int] = None
    question: Optional[str] = None
    code: Optional[str] = None
    errors: Optional[str] = None
    queries_results: Optional[str] = None
    output_dir: Optional[str] = None
    data: Optional[str] = None
    plot_filename: Optional[str] = None


_template_cache: dict[str, str] = {}


def load_template(role: str) -> str:
    if role not in ROLES:
        raise ValueError(f"unknown role {role!r}")
    if role not in _template_cache:
        path = resources.files("labops.llm").joinpath(f"assets/{role}.txt")
        _template_cache[role] = path.read_text(encoding="utf-8")
    return _template_cache[role]


def render_prompt(role: str, ctx: PromptContext) -> str:
    """Substitute the role's placeholders; missing context fields are errors."""
    text = load_template(role)
    for name in ROLE_PLACEHOLDERS[role]:
        value = getattr(ctx, name)
        if value is None:
            raise MissingPlaceholder(role, name)
        text = text.replace("{" + name + "}", str(value))
    for name in ROLE_PLACEHOLDERS[role]:
        if "{" + name + "}" in text:  # substituted values must not reintroduce tokens
            raise MissingPlaceholder(role, name)
    return text

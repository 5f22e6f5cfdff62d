"""Constrained SELECT frontend: lexer, parser, linter, canonical renderer."""

from .lexer import ParseError
from .linter import ValidationReport, lint, nearest_column, resolve_output_aliases
from .nodes import QueryAst
from .parser import parse
from .renderer import render, render_expr

__all__ = [
    "ParseError",
    "QueryAst",
    "ValidationReport",
    "lint",
    "nearest_column",
    "parse",
    "render",
    "render_expr",
    "resolve_output_aliases",
]

"""Tolerant extraction of structured payloads from model output.

Models disobey output contracts often enough that every consumer here
scans for the first balanced JSON region (or the first SELECT) instead
of trusting the raw text.
"""

from __future__ import annotations

import json
import re

from ..sql.linter import ValidationReport


class ExtractionError(ValueError):
    pass


class NoJsonFound(ExtractionError):
    pass


class WrongShape(ExtractionError):
    pass


class NoSelectFound(ExtractionError):
    pass


def _balanced_regions(raw: str, open_ch: str, close_ch: str):
    """Yield candidate substrings with balanced brackets, in document order.

    Bracket counting ignores brackets inside JSON string literals.
    """
    i = 0
    n = len(raw)
    while i < n:
        if raw[i] != open_ch:
            i += 1
            continue
        depth = 0
        in_string = False
        escaped = False
        for j in range(i, n):
            ch = raw[j]
            if in_string:
                if escaped:
                    escaped = False
                elif ch == "\\":
                    escaped = True
                elif ch == '"':
                    in_string = False
                continue
            if ch == '"':
                in_string = True
            elif ch == open_ch:
                depth += 1
            elif ch == close_ch:
                depth -= 1
                if depth == 0:
                    yield raw[i : j + 1]
                    break
        i += 1


def extract_json_array(raw: str) -> list[str]:
    """First well-formed JSON array of strings in *raw*, fences and prose allowed."""
    saw_array = False
    for candidate in _balanced_regions(raw, "[", "]"):
        try:
            parsed = json.loads(candidate)
        except json.JSONDecodeError:
            continue
        if not isinstance(parsed, list):
            continue
        saw_array = True
        if parsed and all(isinstance(item, str) for item in parsed):
            return list(parsed)
        if not parsed:
            return []
    if saw_array:
        raise WrongShape("found a JSON array, but not an array of strings")
    raise NoJsonFound("no JSON array found in model output")


def extract_json_object(raw: str) -> ValidationReport:
    """First JSON object shaped like {is_valid, errors, suggestions}."""
    saw_object = False
    for candidate in _balanced_regions(raw, "{", "}"):
        try:
            parsed = json.loads(candidate)
        except json.JSONDecodeError:
            continue
        if not isinstance(parsed, dict):
            continue
        saw_object = True
        if _is_report_shaped(parsed):
            errors = tuple(str(e) for e in parsed["errors"])
            suggestions = tuple(str(s) for s in parsed["suggestions"])
            if parsed["is_valid"] and errors:
                errors = ()  # contradictory payload: is_valid wins
            if not parsed["is_valid"] and not errors:
                errors = ("query flagged invalid by the model",)
            return ValidationReport(errors=errors, suggestions=suggestions)
    if saw_object:
        raise WrongShape("JSON object lacks is_valid/errors/suggestions keys")
    raise NoJsonFound("no JSON object found in model output")


def _is_report_shaped(parsed: dict) -> bool:
    return (
        isinstance(parsed.get("is_valid"), bool)
        and isinstance(parsed.get("errors"), list)
        and isinstance(parsed.get("suggestions"), list)
    )


_FENCE_RE = re.compile(r"^\s*```[a-zA-Z]*\s*$", re.MULTILINE)
_SELECT_RE = re.compile(r"\bSELECT\b", re.IGNORECASE)


def extract_sql(raw: str) -> str:
    """The first SELECT statement in *raw*: fences and prose stripped,
    trailing semicolon removed, internal blank lines collapsed."""
    text = _FENCE_RE.sub("\n", raw)
    match = _SELECT_RE.search(text)
    if match is None:
        raise NoSelectFound("model output contains no SELECT statement")
    statement = text[match.start() :]
    statement = _cut_at_semicolon(statement)
    lines = [line.rstrip() for line in statement.splitlines()]
    statement = "\n".join(line for line in lines if line.strip())
    return statement.strip()


def _cut_at_semicolon(text: str) -> str:
    in_string = False
    for i, ch in enumerate(text):
        if ch == "'":
            in_string = not in_string
        elif ch == ";" and not in_string:
            return text[:i]
    return text

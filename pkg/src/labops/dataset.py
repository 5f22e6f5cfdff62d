"""Loading and writing jobs datasets.

The interchange format is JSON-lines: one job object per line, JSONB
columns as nested JSON, timestamps as RFC 3339 text with an explicit
offset. CSV is supported as a flat fallback with JSONB cells holding
JSON-encoded text (CSV cannot carry nesting natively).
"""

from __future__ import annotations

import csv
import json
from datetime import datetime
from pathlib import Path
from typing import Iterable, Union

from .schema import JOBS_SCHEMA, ColumnType, JobRecord, format_timestamp, parse_timestamp

PathLike = Union[str, Path]


class DatasetError(Exception):
    """I/O-level failure while reading or writing a dataset file."""


class SchemaViolation(DatasetError):
    """A row that does not satisfy the jobs schema."""

    def __init__(self, row: int, column: str, reason: str):
        super().__init__(f"row {row}, column {column!r}: {reason}")
        self.row = row
        self.column = column
        self.reason = reason


_TIMESTAMP_COLUMNS = tuple(
    c.name for c in JOBS_SCHEMA.columns if c.data_type == ColumnType.TIMESTAMP_TZ
)
_JSONB_COLUMNS = tuple(c.name for c in JOBS_SCHEMA.columns if c.data_type == ColumnType.JSONB)
_REQUIRED_COLUMNS = tuple(c.name for c in JOBS_SCHEMA.columns if not c.nullable)


def record_to_dict(record: JobRecord) -> dict:
    """JSON-ready dict for one record; absent optionals are omitted."""
    out: dict = {}
    for name in JOBS_SCHEMA.column_names():
        value = record.column_value(name)
        if value is None:
            continue
        if isinstance(value, datetime):
            value = format_timestamp(value)
        out[name] = value
    return out


def _record_from_dict(payload: dict, row: int) -> JobRecord:
    if not isinstance(payload, dict):
        raise SchemaViolation(row, "*", "record is not a JSON object")
    known = set(JOBS_SCHEMA.column_names())
    unknown = sorted(set(payload) - known)
    if unknown:
        raise SchemaViolation(row, unknown[0], "unknown column")
    fields: dict = {}
    for name in JOBS_SCHEMA.column_names():
        value = payload.get(name)
        if value is None:
            if name in _REQUIRED_COLUMNS:
                raise SchemaViolation(row, name, "required column is missing or null")
            fields[name] = None
            continue
        if name in _TIMESTAMP_COLUMNS:
            if not isinstance(value, str):
                raise SchemaViolation(row, name, "timestamp must be RFC 3339 text")
            try:
                value = parse_timestamp(value)
            except ValueError as exc:
                raise SchemaViolation(row, name, f"bad timestamp: {exc}") from exc
        elif name not in _JSONB_COLUMNS and not isinstance(value, str):
            raise SchemaViolation(row, name, f"expected text, got {type(value).__name__}")
        fields[name] = value
    try:
        return JobRecord(**fields)
    except ValueError as exc:
        raise SchemaViolation(row, "*", str(exc)) from exc


def load_dataset(path: PathLike, format: str = "jsonl") -> list[JobRecord]:
    """Parse a dataset file into records, rejecting malformed rows by index."""
    path = Path(path)
    if not path.exists():
        raise DatasetError(f"dataset file not found: {path}")
    if format == "jsonl":
        return _load_jsonl(path)
    if format == "csv":
        return _load_csv(path)
    raise DatasetError(f"unsupported dataset format: {format!r}")


def _load_jsonl(path: Path) -> list[JobRecord]:
    records: list[JobRecord] = []
    with path.open("r", encoding="utf-8") as fh:
        row = 0
        for line in fh:
            if not line.strip():
                continue
            try:
                payload = json.loads(line)
            except json.JSONDecodeError as exc:
                raise SchemaViolation(row, "*", f"invalid JSON: {exc}") from exc
            records.append(_record_from_dict(payload, row))
            row += 1
    return records


def _load_csv(path: Path) -> list[JobRecord]:
    records: list[JobRecord] = []
    with path.open("r", encoding="utf-8", newline="") as fh:
        reader = csv.DictReader(fh)
        for row, raw in enumerate(reader):
            payload: dict = {}
            for name, cell in raw.items():
                if cell is None or cell == "":
                    continue
                if name in _JSONB_COLUMNS:
                    try:
                        payload[name] = json.loads(cell)
                    except json.JSONDecodeError as exc:
                        raise SchemaViolation(row, name, f"invalid JSON cell: {exc}") from exc
                else:
                    payload[name] = cell
            records.append(_record_from_dict(payload, row))
    return records


def dump_dataset(records: Iterable[JobRecord], path: PathLike, format: str = "jsonl") -> None:
    """Write records to a dataset file in the given format."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    if format == "jsonl":
        with path.open("w", encoding="utf-8") as fh:
            for record in records:
                fh.write(json.dumps(record_to_dict(record), ensure_ascii=False))
                fh.write("\n")
    elif format == "csv":
        names = JOBS_SCHEMA.column_names()
        with path.open("w", encoding="utf-8", newline="") as fh:
            writer = csv.DictWriter(fh, fieldnames=names)
            writer.writeheader()
            for record in records:
                payload = record_to_dict(record)
                row = {}
                for name in names:
                    value = payload.get(name)
                    if value is None:
                        row[name] = ""
                    elif name in _JSONB_COLUMNS:
                        row[name] = json.dumps(value, ensure_ascii=False)
                    else:
                        row[name] = value
                writer.writerow(row)
    else:
        raise DatasetError(f"unsupported dataset format: {format!r}")

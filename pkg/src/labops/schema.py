"""Data model for the lab-operations ``jobs`` table.

Defines the column metadata, the job row type, and the tabular result
container that query execution produces. All types are immutable after
construction and safe to share across threads.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from datetime import datetime, timezone
from typing import Any, Optional, Union

# Recursive JSON value: null | bool | number | text | array | object.
JsonValue = Union[None, bool, int, float, str, list, dict]

JOB_STATES = ("COMPLETED", "IN_ERROR", "CANCELLED", "RUNNING", "PAUSED", "UNSCHEDULED")


class ColumnType(enum.Enum):
    VARCHAR = "varchar"
    TIMESTAMP_TZ = "timestamp_tz"
    JSONB = "jsonb"


@dataclass(frozen=True)
class ColumnDef:
    name: str
    data_type: ColumnType
    nullable: bool = True


@dataclass(frozen=True)
class TableSchema:
    """Ordered column metadata for one table."""

    table_name: str
    columns: tuple[ColumnDef, ...]

    def __post_init__(self) -> None:
        names = [c.name for c in self.columns]
        if len(names) != len(set(names)):
            raise ValueError(f"duplicate column names in table {self.table_name!r}")

    def column(self, name: str) -> Optional[ColumnDef]:
        for col in self.columns:
            if col.name == name:
                return col
        return None

    def column_names(self) -> tuple[str, ...]:
        return tuple(c.name for c in self.columns)

    def to_prompt_text(self) -> str:
        """Render the schema as the plain-text block injected into prompts."""
        type_names = {
            ColumnType.VARCHAR: "VARCHAR(255)",
            ColumnType.TIMESTAMP_TZ: "TIMESTAMP WITH TIME ZONE",
            ColumnType.JSONB: "JSONB",
        }
        lines = [f"Table: {self.table_name}"]
        for col in self.columns:
            null_note = "NOT NULL" if not col.nullable else "NULL"
            lines.append(f"  {col.name} {type_names[col.data_type]} {null_note}")
        return "\n".join(lines)


def _col(name: str, data_type: ColumnType, nullable: bool = True) -> ColumnDef:
    return ColumnDef(name=name, data_type=data_type, nullable=nullable)


#: The 21 columns of the jobs table, in order.
JOBS_SCHEMA = TableSchema(
    table_name="jobs",
    columns=(
        _col("id", ColumnType.VARCHAR, nullable=False),
        _col("name", ColumnType.VARCHAR, nullable=False),
        _col("lab_id", ColumnType.VARCHAR, nullable=False),
        _col("workflow_id", ColumnType.VARCHAR, nullable=False),
        _col("state", ColumnType.VARCHAR, nullable=False),
        _col("created_timestamp", ColumnType.TIMESTAMP_TZ, nullable=False),
        _col("started_timestamp", ColumnType.TIMESTAMP_TZ),
        _col("completed_timestamp", ColumnType.TIMESTAMP_TZ),
        _col("root_action_id", ColumnType.VARCHAR),
        _col("lab_reference", ColumnType.VARCHAR),
        _col("associated_ids", ColumnType.JSONB),
        _col("parameters", ColumnType.JSONB),
        _col("outputs", ColumnType.JSONB),
        _col("barcodes", ColumnType.JSONB),
        _col("batched_job_ids", ColumnType.JSONB),
        _col("children_job_ids", ColumnType.JSONB),
        _col("execution_records", ColumnType.JSONB),
        _col("logs", ColumnType.JSONB),
        _col("files", ColumnType.JSONB),
        _col("notes", ColumnType.JSONB),
        _col("configuration_versions", ColumnType.JSONB),
    ),
)

LOG_ENTRY_KEYS = ("level", "message", "created_timestamp")
EXECUTION_RECORD_KEYS = ("event_type", "name", "started_timestamp", "finished_timestamp")


def parse_timestamp(text: str) -> datetime:
    """Parse an RFC 3339 timestamp; a trailing ``Z`` means UTC.

    Date-only strings are read as midnight UTC.
    """
    raw = text.strip()
    if raw.endswith(("Z", "z")):
        raw = raw[:-1] + "+00:00"
    dt = datetime.fromisoformat(raw)
    if dt.tzinfo is None:
        dt = dt.replace(tzinfo=timezone.utc)
    return dt


def format_timestamp(dt: datetime) -> str:
    return dt.isoformat()


@dataclass(frozen=True)
class JobRecord:
    """One row of the jobs table. Optional fields may be None."""

    id: str
    name: str
    lab_id: str
    workflow_id: str
    state: str
    created_timestamp: datetime
    started_timestamp: Optional[datetime] = None
    completed_timestamp: Optional[datetime] = None
    root_action_id: Optional[str] = None
    lab_reference: Optional[str] = None
    associated_ids: JsonValue = None
    parameters: JsonValue = None
    outputs: JsonValue = None
    barcodes: JsonValue = None
    batched_job_ids: JsonValue = None
    children_job_ids: JsonValue = None
    execution_records: JsonValue = None
    logs: JsonValue = None
    files: JsonValue = None
    notes: JsonValue = None
    configuration_versions: JsonValue = None

    def __post_init__(self) -> None:
        if self.started_timestamp is not None and self.started_timestamp < self.created_timestamp:
            raise ValueError(f"job {self.id}: started_timestamp precedes created_timestamp")
        if self.completed_timestamp is not None:
            if self.started_timestamp is None:
                raise ValueError(f"job {self.id}: completed_timestamp without started_timestamp")
            if self.completed_timestamp < self.started_timestamp:
                raise ValueError(f"job {self.id}: completed_timestamp precedes started_timestamp")
        if self.logs is not None:
            _check_entry_list("logs", self.logs, LOG_ENTRY_KEYS)
        if self.execution_records is not None:
            _check_entry_list("execution_records", self.execution_records, EXECUTION_RECORD_KEYS)

    def column_value(self, column: str) -> Any:
        return getattr(self, column)


def _check_entry_list(column: str, value: JsonValue, required_keys: tuple[str, ...]) -> None:
    if not isinstance(value, list):
        raise ValueError(f"{column} must be a list of entries, got {type(value).__name__}")
    for i, entry in enumerate(value):
        if not isinstance(entry, dict):
            raise ValueError(f"{column}[{i}] must be an object")
        missing = [k for k in required_keys if k not in entry]
        if missing:
            raise ValueError(f"{column}[{i}] missing keys: {', '.join(missing)}")


class ColumnKind(enum.Enum):
    TEXT = "text"
    NUMBER = "number"


@dataclass(frozen=True)
class ResultColumn:
    name: str
    kind: ColumnKind
    nullable: bool = True


@dataclass(frozen=True)
class ResultSet:
    """Named, typed columns plus row tuples, as produced by query execution."""

    columns: tuple[ResultColumn, ...]
    rows: tuple[tuple, ...] = field(default_factory=tuple)

    def __post_init__(self) -> None:
        width = len(self.columns)
        for i, row in enumerate(self.rows):
            if len(row) != width:
                raise ValueError(f"row {i} has {len(row)} values, expected {width}")

    @property
    def column_names(self) -> tuple[str, ...]:
        return tuple(c.name for c in self.columns)

    def is_empty(self) -> bool:
        return not self.rows

"""Backend-agnostic query execution over an in-memory record list."""

from __future__ import annotations

from .engine import ExecutionError, evaluate
from .schema import JOBS_SCHEMA, JobRecord, ResultSet, TableSchema
from .sql.nodes import QueryAst


class Datastore:
    """Holds one loaded dataset and executes linted queries against it."""

    def __init__(self, records: list[JobRecord], schema: TableSchema = JOBS_SCHEMA):
        self.records = list(records)
        self.schema = schema

    def execute(self, query: QueryAst) -> ResultSet:
        return execute(query, self.records)


def execute(query: QueryAst, data: list[JobRecord]) -> ResultSet:
    """Evaluate *query* over *data*; ExecutionError messages are retry feedback."""
    return evaluate(query, data)

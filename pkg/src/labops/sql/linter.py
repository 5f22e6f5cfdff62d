"""Schema-aware lint for parsed queries.

Produces a ValidationReport with rule-based errors and concrete fix
suggestions (nearest column name by edit distance, missing GROUP BY
expressions). A query that passes lint is guaranteed to bind cleanly in
the query engine.
"""

from __future__ import annotations

import enum
import json
from dataclasses import dataclass, field

from ..schema import ColumnType, TableSchema
from .nodes import (
    TO_CHAR_PATTERNS,
    BinaryOp,
    Cast,
    ColumnRef,
    CountStar,
    EpochDiff,
    Expr,
    FuncCall,
    IsNull,
    JsonAccess,
    NumberLit,
    OrderItem,
    QueryAst,
    SelectItem,
    TextLit,
    ToChar,
    contains_aggregate,
    walk,
)
from .renderer import render_expr


@dataclass(frozen=True)
class ValidationReport:
    """The {is_valid, errors, suggestions} verdict for one query."""

    errors: tuple[str, ...] = ()
    suggestions: tuple[str, ...] = ()

    @property
    def is_valid(self) -> bool:
        return not self.errors

    def to_dict(self) -> dict:
        return {
            "is_valid": self.is_valid,
            "errors": list(self.errors),
            "suggestions": list(self.suggestions),
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=4)


class ExprType(enum.Enum):
    TEXT = "text"
    NUMBER = "number"
    TIMESTAMP = "timestamp"
    JSON = "json"
    BOOL = "bool"
    UNKNOWN = "unknown"


_ARITHMETIC = {"+", "-", "*", "/"}
_COMPARISONS = {"=", "!=", "<>", "<", "<=", ">", ">="}


def levenshtein(a: str, b: str) -> int:
    if len(a) < len(b):
        a, b = b, a
    previous = list(range(len(b) + 1))
    for i, ca in enumerate(a, start=1):
        current = [i]
        for j, cb in enumerate(b, start=1):
            current.append(min(previous[j] + 1, current[j - 1] + 1, previous[j - 1] + (ca != cb)))
        previous = current
    return previous[-1]


def nearest_column(name: str, schema: TableSchema, max_distance: int = 3) -> str | None:
    best: tuple[int, str] | None = None
    for col in schema.column_names():
        d = levenshtein(name.lower(), col.lower())
        if d <= max_distance and (best is None or d < best[0]):
            best = (d, col)
    return best[1] if best else None


def resolve_output_aliases(ast: QueryAst, schema: TableSchema) -> QueryAst:
    """Replace alias references in GROUP BY / ORDER BY with their expressions.

    GROUP BY prefers an input column over an alias of the same name;
    ORDER BY prefers the output alias, mirroring PostgreSQL.
    """
    aliases = {item.alias: item.expr for item in ast.select_items if item.alias}
    columns = set(schema.column_names())

    def resolve(expr: Expr, prefer_alias: bool) -> Expr:
        if isinstance(expr, ColumnRef) and expr.name in aliases:
            if prefer_alias or expr.name not in columns:
                return aliases[expr.name]
        return expr

    return QueryAst(
        select_items=ast.select_items,
        from_table=ast.from_table,
        where=ast.where,
        group_by=tuple(resolve(e, prefer_alias=False) for e in ast.group_by),
        order_by=tuple(
            OrderItem(resolve(i.expr, prefer_alias=True), i.descending) for i in ast.order_by
        ),
        limit=ast.limit,
    )


def infer_type(expr: Expr, schema: TableSchema) -> ExprType:
    if isinstance(expr, ColumnRef):
        col = schema.column(expr.name)
        if col is None:
            return ExprType.UNKNOWN
        return {
            ColumnType.VARCHAR: ExprType.TEXT,
            ColumnType.TIMESTAMP_TZ: ExprType.TIMESTAMP,
            ColumnType.JSONB: ExprType.JSON,
        }[col.data_type]
    if isinstance(expr, TextLit):
        return ExprType.TEXT
    if isinstance(expr, NumberLit):
        return ExprType.NUMBER
    if isinstance(expr, (CountStar, EpochDiff, Cast)):
        return ExprType.NUMBER
    if isinstance(expr, ToChar):
        return ExprType.TEXT
    if isinstance(expr, JsonAccess):
        return ExprType.TEXT if expr.as_text else ExprType.JSON
    if isinstance(expr, FuncCall):
        if expr.name in ("AVG", "SUM", "COUNT"):
            return ExprType.NUMBER
        return infer_type(expr.args[0], schema) if expr.args else ExprType.UNKNOWN
    if isinstance(expr, BinaryOp):
        if expr.op in _ARITHMETIC:
            return ExprType.NUMBER
        return ExprType.BOOL
    if isinstance(expr, IsNull):
        return ExprType.BOOL
    return ExprType.UNKNOWN


@dataclass
class _Findings:
    errors: list[str] = field(default_factory=list)
    suggestions: list[str] = field(default_factory=list)

    def add(self, error: str, suggestion: str | None = None) -> None:
        if error not in self.errors:
            self.errors.append(error)
        if suggestion and suggestion not in self.suggestions:
            self.suggestions.append(suggestion)


def lint(ast: QueryAst, schema: TableSchema) -> ValidationReport:
    """Check a parsed query against the schema and the output contract."""
    out = _Findings()
    resolved = resolve_output_aliases(ast, schema)

    if resolved.from_table != schema.table_name:
        out.add(
            f"Unknown table '{resolved.from_table}'",
            f"Query the '{schema.table_name}' table",
        )

    _check_columns(resolved, schema, out)
    _check_select_width(resolved, out)
    _check_aggregate_placement(resolved, out)
    _check_grouping(resolved, schema, out)
    _check_expressions(resolved, schema, out)

    return ValidationReport(errors=tuple(out.errors), suggestions=tuple(out.suggestions))


def _all_exprs(ast: QueryAst):
    for item in ast.select_items:
        yield item.expr
    if ast.where is not None:
        yield ast.where
    yield from ast.group_by
    for item in ast.order_by:
        yield item.expr


def _check_columns(ast: QueryAst, schema: TableSchema, out: _Findings) -> None:
    known = set(schema.column_names())
    for top in _all_exprs(ast):
        for node in walk(top):
            name = None
            if isinstance(node, ColumnRef):
                name = node.name
            elif isinstance(node, JsonAccess):
                name = node.column
            if name is None or name in known:
                continue
            near = nearest_column(name, schema)
            suggestion = f"Use valid column '{near}'" if near else None
            out.add(f"Invalid column '{name}'", suggestion)


def _check_select_width(ast: QueryAst, out: _Findings) -> None:
    n = len(ast.select_items)
    if not 2 <= n <= 3:
        noun = "column" if n == 1 else "columns"
        out.add(
            f"Query returns {n} {noun}, need 2-3 for visualization",
            "Select 2-3 columns (e.g., a category or date plus a numeric value)",
        )


def _check_aggregate_placement(ast: QueryAst, out: _Findings) -> None:
    if ast.where is not None and contains_aggregate(ast.where):
        out.add("Aggregate functions are not allowed in WHERE")
    for expr in ast.group_by:
        if contains_aggregate(expr):
            out.add("Aggregate functions are not allowed in GROUP BY")
        if isinstance(expr, (NumberLit, TextLit)):
            out.add("GROUP BY must reference a column or expression, not a literal")
    for item in ast.order_by:
        if isinstance(item.expr, NumberLit):
            out.add("ORDER BY ordinals are not supported; order by a named column or alias")
    for top in _all_exprs(ast):
        for node in walk(top):
            if isinstance(node, FuncCall) and node.is_aggregate and any(
                contains_aggregate(a) for a in node.args
            ):
                out.add("Nested aggregate functions are not allowed")


def _is_group_computable(expr: Expr, group_keys: tuple[Expr, ...]) -> bool:
    """True if *expr* is built from group keys, literals, and aggregates."""
    if expr in group_keys:
        return True
    if isinstance(expr, (TextLit, NumberLit, CountStar)):
        return True
    if isinstance(expr, FuncCall) and expr.is_aggregate:
        return True
    if isinstance(expr, FuncCall):
        return all(_is_group_computable(a, group_keys) for a in expr.args)
    if isinstance(expr, ToChar):
        return _is_group_computable(expr.arg, group_keys)
    if isinstance(expr, EpochDiff):
        return _is_group_computable(expr.left, group_keys) and _is_group_computable(
            expr.right, group_keys
        )
    if isinstance(expr, BinaryOp):
        return _is_group_computable(expr.left, group_keys) and _is_group_computable(
            expr.right, group_keys
        )
    if isinstance(expr, IsNull):
        return _is_group_computable(expr.arg, group_keys)
    if isinstance(expr, Cast):
        return _is_group_computable(expr.arg, group_keys)
    return False  # bare column or JSONB access not covered by a group key


def _check_grouping(ast: QueryAst, schema: TableSchema, out: _Findings) -> None:
    has_aggregate = any(contains_aggregate(i.expr) for i in ast.select_items) or any(
        contains_aggregate(i.expr) for i in ast.order_by
    )
    if not has_aggregate and not ast.group_by:
        return
    offenders: list[str] = []
    checked = [i.expr for i in ast.select_items] + [i.expr for i in ast.order_by]
    for expr in checked:
        if not _is_group_computable(expr, ast.group_by):
            text = render_expr(expr)
            if text not in offenders:
                offenders.append(text)
    for text in offenders:
        label = "Column" if " " not in text else "Expression"
        out.add(f"{label} '{text}' must appear in GROUP BY", f"Add GROUP BY {text}")


def _check_expressions(ast: QueryAst, schema: TableSchema, out: _Findings) -> None:
    for item in ast.select_items:
        if infer_type(item.expr, schema) == ExprType.TIMESTAMP:
            text = render_expr(item.expr)
            out.add(
                f"Timestamp expression '{text}' must be returned as text",
                f"Wrap it in TO_CHAR({text}, 'YYYY-MM-DD')",
            )
    for top in _all_exprs(ast):
        for node in walk(top):
            _check_node(node, schema, out)


def _check_node(node: Expr, schema: TableSchema, out: _Findings) -> None:
    if isinstance(node, JsonAccess):
        col = schema.column(node.column)
        if col is not None and col.data_type != ColumnType.JSONB:
            out.add(
                f"Column '{node.column}' is not JSONB; '->' access is invalid",
                f"Use '->'/'->>' only on JSONB columns",
            )
    elif isinstance(node, ToChar):
        if node.pattern not in TO_CHAR_PATTERNS:
            out.add(
                f"Unsupported TO_CHAR pattern '{node.pattern}'",
                "Use 'YYYY-MM-DD' for daily or 'YYYY-\"W\"WW' for weekly grouping",
            )
        if infer_type(node.arg, schema) in (ExprType.NUMBER, ExprType.BOOL, ExprType.JSON):
            out.add("TO_CHAR requires a timestamp argument")
    elif isinstance(node, EpochDiff):
        for side in (node.left, node.right):
            if infer_type(side, schema) in (ExprType.NUMBER, ExprType.BOOL, ExprType.JSON):
                out.add(
                    "EXTRACT(EPOCH FROM ...) operands must be timestamps",
                    "Subtract two timestamp columns, e.g. completed_timestamp - started_timestamp",
                )
    elif isinstance(node, FuncCall) and node.name in ("AVG", "SUM"):
        arg_type = infer_type(node.args[0], schema)
        if arg_type in (ExprType.TEXT, ExprType.TIMESTAMP, ExprType.JSON, ExprType.BOOL):
            out.add(
                f"{node.name} requires a numeric argument",
                "Cast text values first, e.g. (col ->> 'key')::FLOAT",
            )
    elif isinstance(node, BinaryOp):
        left = infer_type(node.left, schema)
        right = infer_type(node.right, schema)
        if node.op in _ARITHMETIC:
            for t in (left, right):
                if t in (ExprType.TIMESTAMP, ExprType.JSON, ExprType.BOOL):
                    out.add(
                        "Arithmetic on timestamps is only supported inside EXTRACT(EPOCH FROM (ts2 - ts1))"
                        if t == ExprType.TIMESTAMP
                        else f"Arithmetic requires numeric operands, got {t.value}"
                    )
        elif node.op in _COMPARISONS:
            pair = {left, right}
            if pair == {ExprType.NUMBER, ExprType.TEXT}:
                out.add(
                    "Cannot compare a number with text",
                    "Cast the text side to FLOAT, e.g. (col ->> 'key')::FLOAT",
                )
            elif ExprType.JSON in pair:
                out.add(
                    "JSON values cannot be compared directly",
                    "Use '->>' to extract text before comparing",
                )
        elif node.op in ("AND", "OR"):
            for t in (left, right):
                if t in (ExprType.NUMBER, ExprType.TEXT, ExprType.TIMESTAMP, ExprType.JSON):
                    out.add(f"{node.op} requires boolean operands, got {t.value}")
    elif isinstance(node, Cast):
        if infer_type(node.arg, schema) in (ExprType.TIMESTAMP, ExprType.BOOL, ExprType.JSON):
            out.add("Only numbers and numeric text can be cast to FLOAT/NUMERIC")

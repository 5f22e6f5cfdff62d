"""In-memory evaluator for linted queries over job records.

PostgreSQL-compatible semantics for the supported subset: three-valued
WHERE logic, null-skipping aggregates, exact decimal numerics for
aggregate results, timestamp differences carried as whole microseconds.
The bind step compiles the query into closures; data-dependent failures
surface during execution.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from datetime import datetime
from decimal import Decimal, InvalidOperation
from typing import Callable, Optional

from ..schema import (
    JOBS_SCHEMA,
    ColumnKind,
    ColumnType,
    JobRecord,
    ResultColumn,
    ResultSet,
    parse_timestamp,
)
from ..sql.linter import resolve_output_aliases
from ..sql.nodes import (
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
    QueryAst,
    SelectItem,
    TextLit,
    ToChar,
    contains_aggregate,
    walk,
)
from .errors import ExecutionError

_JSONB_COLUMNS = frozenset(
    c.name for c in JOBS_SCHEMA.columns if c.data_type == ColumnType.JSONB
)
_ALL_COLUMNS = frozenset(JOBS_SCHEMA.column_names())


@dataclass(frozen=True)
class MissingKey:
    """Sentinel for a JSONB key that is absent; acts as NULL except under a cast."""

    column: str
    key: str


@dataclass(frozen=True)
class JsonScalar:
    """Wrapper for '->' results so JSON values stay distinct from text."""

    payload: object

    def canonical(self) -> str:
        return json.dumps(self.payload, ensure_ascii=False, separators=(",", ":"))


RowFn = Callable[[JobRecord], object]


def null_like(value) -> bool:
    return value is None or isinstance(value, MissingKey)


def evaluate(ast: QueryAst, rows: list[JobRecord]) -> ResultSet:
    """Run *ast* over *rows*; raises ExecutionError on bind or data failures."""
    plan = _bind(ast)
    return plan.run(rows)


# -- binding / compilation ----------------------------------------------


def _bind(ast: QueryAst) -> "_Plan":
    resolved = resolve_output_aliases(ast, JOBS_SCHEMA)
    _validate(resolved)

    grouped = bool(resolved.group_by) or _uses_aggregates(resolved)
    if grouped:
        key_fns = [_compile_row(e) for e in resolved.group_by]
        select_fns = [
            _compile_grouped(item.expr, resolved.group_by) for item in resolved.select_items
        ]
        order_fns = [
            _compile_grouped(item.expr, resolved.group_by) for item in resolved.order_by
        ]
    else:
        key_fns = []
        select_fns = [_compile_row(item.expr) for item in resolved.select_items]
        order_fns = [_compile_row(item.expr) for item in resolved.order_by]

    where_fn = _compile_row(resolved.where) if resolved.where is not None else None
    columns = tuple(
        ResultColumn(name=_output_name(item), kind=_static_kind(item.expr))
        for item in resolved.select_items
    )
    return _Plan(
        columns=columns,
        where_fn=where_fn,
        grouped=grouped,
        key_fns=key_fns,
        select_fns=select_fns,
        order_fns=order_fns,
        descending=[i.descending for i in resolved.order_by],
        limit=resolved.limit,
    )


def _uses_aggregates(ast: QueryAst) -> bool:
    return any(contains_aggregate(i.expr) for i in ast.select_items) or any(
        contains_aggregate(i.expr) for i in ast.order_by
    )


def _validate(ast: QueryAst) -> None:
    for top in _tops(ast):
        for node in walk(top):
            if isinstance(node, ColumnRef) and node.name not in _ALL_COLUMNS:
                raise ExecutionError(f'column "{node.name}" does not exist', phase="bind")
            if isinstance(node, JsonAccess):
                if node.column not in _ALL_COLUMNS:
                    raise ExecutionError(f'column "{node.column}" does not exist', phase="bind")
                if node.column not in _JSONB_COLUMNS:
                    raise ExecutionError(f'column "{node.column}" is not JSONB', phase="bind")
            if isinstance(node, ToChar) and node.pattern not in TO_CHAR_PATTERNS:
                raise ExecutionError(
                    f'unsupported TO_CHAR pattern "{node.pattern}"', phase="bind"
                )
            if isinstance(node, FuncCall) and node.is_aggregate:
                if any(contains_aggregate(a) for a in node.args):
                    raise ExecutionError("aggregate calls cannot be nested", phase="bind")
    if ast.where is not None and contains_aggregate(ast.where):
        raise ExecutionError("aggregates are not allowed in WHERE", phase="bind")
    for e in ast.group_by:
        if contains_aggregate(e):
            raise ExecutionError("aggregates are not allowed in GROUP BY", phase="bind")
        if isinstance(e, (NumberLit, TextLit)):
            raise ExecutionError("cannot GROUP BY a literal", phase="bind")
    for item in ast.order_by:
        if isinstance(item.expr, NumberLit):
            raise ExecutionError("ORDER BY ordinals are not supported", phase="bind")


def _tops(ast: QueryAst):
    for item in ast.select_items:
        yield item.expr
    if ast.where is not None:
        yield ast.where
    yield from ast.group_by
    for item in ast.order_by:
        yield item.expr


def _compile_row(expr: Expr) -> RowFn:
    """Compile an expression into a per-record closure."""
    if isinstance(expr, ColumnRef):
        name = expr.name
        return lambda r: getattr(r, name)
    if isinstance(expr, TextLit):
        value = expr.value
        return lambda r: value
    if isinstance(expr, NumberLit):
        value = expr.value
        return lambda r: value
    if isinstance(expr, JsonAccess):
        column, key, as_text = expr.column, expr.key, expr.as_text
        missing = MissingKey(column, key)

        def json_fn(r):
            container = getattr(r, column)
            if container is None:
                return None
            if not isinstance(container, dict) or key not in container:
                return missing
            value = container[key]
            if value is None:
                return None
            return _json_as_text(value) if as_text else JsonScalar(value)

        return json_fn
    if isinstance(expr, Cast):
        inner = _compile_row(expr.arg)
        return lambda r: _cast_numeric(inner(r))
    if isinstance(expr, ToChar):
        inner = _compile_row(expr.arg)
        pattern = expr.pattern
        return lambda r: _format_timestamp(inner(r), pattern)
    if isinstance(expr, EpochDiff):
        left = _compile_row(expr.left)
        right = _compile_row(expr.right)
        return lambda r: _epoch_diff(left(r), right(r))
    if isinstance(expr, IsNull):
        inner = _compile_row(expr.arg)
        if expr.negated:
            return lambda r: not null_like(inner(r))
        return lambda r: null_like(inner(r))
    if isinstance(expr, BinaryOp):
        left = _compile_row(expr.left)
        right = _compile_row(expr.right)
        combine = _binary_combiner(expr.op)
        return lambda r: combine(left(r), right(r))
    if isinstance(expr, FuncCall) and expr.name == "COALESCE":
        arg_fns = [_compile_row(a) for a in expr.args]

        def coalesce_fn(r):
            for fn in arg_fns:
                value = fn(r)
                if not null_like(value):
                    return value
            return None

        return coalesce_fn
    if isinstance(expr, (FuncCall, CountStar)):
        raise ExecutionError("aggregate used outside a grouped context", phase="bind")
    raise ExecutionError(f"cannot compile expression {expr!r}", phase="bind")


def _compile_grouped(expr: Expr, group_keys: tuple[Expr, ...]) -> Callable:
    """Compile an expression evaluated once per group.

    The closure receives (key_values, members) where key_values aligns
    with group_keys and members is the group's record list.
    """
    for i, key in enumerate(group_keys):
        if expr == key:
            return lambda kv, members, _i=i: kv[_i]
    if isinstance(expr, CountStar):
        return lambda kv, members: Decimal(len(members))
    if isinstance(expr, FuncCall) and expr.is_aggregate:
        arg_fn = _compile_row(expr.args[0])
        reducer = _AGGREGATE_REDUCERS[expr.name]
        return lambda kv, members: reducer(arg_fn, members, expr.name)
    if isinstance(expr, (TextLit, NumberLit)):
        value = expr.value
        return lambda kv, members: value
    if isinstance(expr, FuncCall) and expr.name == "COALESCE":
        arg_fns = [_compile_grouped(a, group_keys) for a in expr.args]

        def coalesce_fn(kv, members):
            for fn in arg_fns:
                value = fn(kv, members)
                if not null_like(value):
                    return value
            return None

        return coalesce_fn
    if isinstance(expr, ToChar):
        inner = _compile_grouped(expr.arg, group_keys)
        pattern = expr.pattern
        return lambda kv, members: _format_timestamp(inner(kv, members), pattern)
    if isinstance(expr, Cast):
        inner = _compile_grouped(expr.arg, group_keys)
        return lambda kv, members: _cast_numeric(inner(kv, members))
    if isinstance(expr, EpochDiff):
        left = _compile_grouped(expr.left, group_keys)
        right = _compile_grouped(expr.right, group_keys)
        return lambda kv, members: _epoch_diff(left(kv, members), right(kv, members))
    if isinstance(expr, IsNull):
        inner = _compile_grouped(expr.arg, group_keys)
        negated = expr.negated
        return lambda kv, members: (
            not null_like(inner(kv, members)) if negated else null_like(inner(kv, members))
        )
    if isinstance(expr, BinaryOp):
        left = _compile_grouped(expr.left, group_keys)
        right = _compile_grouped(expr.right, group_keys)
        combine = _binary_combiner(expr.op)
        return lambda kv, members: combine(left(kv, members), right(kv, members))
    if isinstance(expr, (ColumnRef, JsonAccess)):
        name = expr.name if isinstance(expr, ColumnRef) else expr.column
        raise ExecutionError(
            f'column "{name}" must appear in the GROUP BY clause or be used in an aggregate function',
            phase="bind",
        )
    raise ExecutionError(f"cannot compile expression {expr!r}", phase="bind")


# -- scalar operations ----------------------------------------------------


def _json_as_text(value) -> str:
    if isinstance(value, str):
        return value
    if value is True:
        return "true"
    if value is False:
        return "false"
    return json.dumps(value, ensure_ascii=False, separators=(",", ":"))


def _cast_numeric(value):
    if isinstance(value, MissingKey):
        raise ExecutionError(
            f"missing JSONB key '{value.key}' in column '{value.column}' cast without COALESCE"
        )
    if value is None:
        return None
    if isinstance(value, Decimal):
        return value
    if isinstance(value, str):
        try:
            return Decimal(value.strip())
        except InvalidOperation:
            raise ExecutionError(f"cannot cast {value!r} to a number") from None
    raise ExecutionError("only numbers and numeric text can be cast")


def _as_timestamp(value) -> Optional[datetime]:
    if null_like(value):
        return None
    if isinstance(value, datetime):
        return value
    if isinstance(value, str):
        try:
            return parse_timestamp(value)
        except ValueError:
            raise ExecutionError(f"invalid timestamp text {value!r}") from None
    raise ExecutionError("expected a timestamp value")


def _format_timestamp(value, pattern: str):
    ts = _as_timestamp(value)
    if ts is None:
        return None
    if pattern == "YYYY-MM-DD":
        return f"{ts.year:04d}-{ts.month:02d}-{ts.day:02d}"
    # 'YYYY-"W"WW': week 1 starts January 1st.
    week = (ts.timetuple().tm_yday - 1) // 7 + 1
    return f"{ts.year:04d}-W{week:02d}"


def _epoch_diff(left, right):
    lts = _as_timestamp(left)
    rts = _as_timestamp(right)
    if lts is None or rts is None:
        return None
    td = lts - rts
    micros = (td.days * 86_400 + td.seconds) * 1_000_000 + td.microseconds
    return Decimal(micros) / Decimal(1_000_000)


def _require_bool(value):
    if null_like(value):
        return None
    if type(value) is bool:
        return value
    raise ExecutionError("argument of AND/OR must be boolean")


def _binary_combiner(op: str):
    if op == "AND":

        def and_fn(left, right):
            a, b = _require_bool(left), _require_bool(right)
            if a is False or b is False:
                return False
            if a is None or b is None:
                return None
            return True

        return and_fn
    if op == "OR":

        def or_fn(left, right):
            a, b = _require_bool(left), _require_bool(right)
            if a is True or b is True:
                return True
            if a is None or b is None:
                return None
            return False

        return or_fn
    if op in ("+", "-", "*", "/"):

        def arith_fn(left, right):
            if null_like(left) or null_like(right):
                return None
            if isinstance(left, datetime) or isinstance(right, datetime):
                raise ExecutionError(
                    "timestamp arithmetic is only supported inside EXTRACT(EPOCH FROM (ts2 - ts1))"
                )
            if not isinstance(left, Decimal) or not isinstance(right, Decimal):
                raise ExecutionError(f"operator {op} requires numeric operands")
            if op == "+":
                return left + right
            if op == "-":
                return left - right
            if op == "*":
                return left * right
            if right == 0:
                raise ExecutionError("division by zero")
            return left / right

        return arith_fn

    def cmp_fn(left, right):
        if null_like(left) or null_like(right):
            return None
        a, b = _coerce_comparison(left, right)
        if op == "=":
            return a == b
        if op in ("!=", "<>"):
            return a != b
        try:
            if op == "<":
                return a < b
            if op == "<=":
                return a <= b
            if op == ">":
                return a > b
            return a >= b
        except TypeError:
            raise ExecutionError("cannot order these value types") from None

    return cmp_fn


def _coerce_comparison(left, right):
    if isinstance(left, JsonScalar) or isinstance(right, JsonScalar):
        raise ExecutionError("JSON values cannot be compared; use '->>' for text")
    if isinstance(left, datetime) and isinstance(right, str):
        return left, _as_timestamp(right)
    if isinstance(right, datetime) and isinstance(left, str):
        return _as_timestamp(left), right
    if type(left) is bool or type(right) is bool:
        if type(left) is bool and type(right) is bool:
            return left, right
        raise ExecutionError("cannot compare boolean with non-boolean")
    if isinstance(left, Decimal) != isinstance(right, Decimal):
        raise ExecutionError("cannot compare a number with text")
    return left, right


# -- aggregates ------------------------------------------------------------


def _collect(arg_fn: RowFn, members) -> list:
    values = []
    for record in members:
        value = arg_fn(record)
        if not null_like(value):
            values.append(value)
    return values


def _reduce_count(arg_fn, members, name):
    return Decimal(len(_collect(arg_fn, members)))


def _reduce_sum(arg_fn, members, name):
    values = _collect(arg_fn, members)
    if not values:
        return None
    total = Decimal(0)
    for v in values:
        if not isinstance(v, Decimal):
            raise ExecutionError(f"{name} requires numeric inputs")
        total += v
    return total


def _reduce_avg(arg_fn, members, name):
    values = _collect(arg_fn, members)
    if not values:
        return None
    total = Decimal(0)
    for v in values:
        if not isinstance(v, Decimal):
            raise ExecutionError(f"{name} requires numeric inputs")
        total += v
    return total / Decimal(len(values))


def _reduce_extreme(arg_fn, members, name):
    values = _collect(arg_fn, members)
    if not values:
        return None
    best = values[0]
    for v in values[1:]:
        a, b = _coerce_comparison(v, best)
        try:
            take = a < b if name == "MIN" else a > b
        except TypeError:
            raise ExecutionError("cannot order these value types") from None
        if take:
            best = v
    return best


_AGGREGATE_REDUCERS = {
    "COUNT": _reduce_count,
    "SUM": _reduce_sum,
    "AVG": _reduce_avg,
    "MIN": _reduce_extreme,
    "MAX": _reduce_extreme,
}


# -- plan execution ---------------------------------------------------------


@dataclass
class _Plan:
    columns: tuple[ResultColumn, ...]
    where_fn: Optional[RowFn]
    grouped: bool
    key_fns: list
    select_fns: list
    order_fns: list
    descending: list[bool]
    limit: Optional[int]

    def run(self, rows: list[JobRecord]) -> ResultSet:
        kept = rows
        if self.where_fn is not None:
            kept = [r for r in rows if self.where_fn(r) is True]

        if self.grouped:
            out = self._run_grouped(kept)
        else:
            out = [
                (
                    [fn(r) for fn in self.select_fns],
                    [fn(r) for fn in self.order_fns],
                )
                for r in kept
            ]

        out = self._order(out)
        if self.limit is not None:
            out = out[: self.limit]
        final = tuple(tuple(_to_output(v) for v in selected) for selected, _ in out)
        return ResultSet(columns=self.columns, rows=final)

    def _run_grouped(self, kept: list[JobRecord]):
        groups: dict[tuple, tuple[list, list[JobRecord]]] = {}
        if self.key_fns:
            for record in kept:
                key_values = [fn(record) for fn in self.key_fns]
                token = tuple(_hash_token(v) for v in key_values)
                entry = groups.get(token)
                if entry is None:
                    groups[token] = (key_values, [record])
                else:
                    entry[1].append(record)
        else:
            groups[()] = ([], list(kept))  # one global group, even over empty input
        out = []
        for key_values, members in groups.values():
            selected = [fn(key_values, members) for fn in self.select_fns]
            order_keys = [fn(key_values, members) for fn in self.order_fns]
            out.append((selected, order_keys))
        return out

    def _order(self, out):
        if not self.order_fns:
            return out
        ordered = list(out)
        for i in range(len(self.order_fns) - 1, -1, -1):
            desc = self.descending[i]
            ordered = sorted(
                ordered,
                key=lambda pair, _i=i: _sort_token(pair[1][_i]),
                reverse=desc,
            )
        return ordered


def _hash_token(value):
    if null_like(value):
        return ("null",)
    if isinstance(value, JsonScalar):
        return ("json", json.dumps(value.payload, sort_keys=True, separators=(",", ":")))
    if isinstance(value, Decimal):
        return ("number", value)
    if isinstance(value, datetime):
        return ("timestamp", value)
    if type(value) is bool:
        return ("bool", value)
    return ("text", value)


class _SortValue:
    __slots__ = ("value",)

    def __init__(self, value):
        self.value = value

    def __lt__(self, other):
        a, b = self.value, other.value
        if a is None or b is None:
            return False
        if isinstance(a, JsonScalar) or isinstance(b, JsonScalar):
            raise ExecutionError("JSON values cannot be ordered; use '->>' for text")
        if isinstance(a, datetime) and isinstance(b, str):
            b = _as_timestamp(b)
        elif isinstance(b, datetime) and isinstance(a, str):
            a = _as_timestamp(a)
        try:
            return a < b
        except TypeError:
            raise ExecutionError("cannot order these value types") from None


def _sort_token(value):
    if null_like(value):
        return (1, _SortValue(None))
    return (0, _SortValue(value))


# -- output shaping ----------------------------------------------------------


def _output_name(item: SelectItem) -> str:
    if item.alias:
        return item.alias
    expr = item.expr
    if isinstance(expr, ColumnRef):
        return expr.name
    if isinstance(expr, CountStar):
        return "count"
    if isinstance(expr, FuncCall):
        return expr.name.lower()
    if isinstance(expr, ToChar):
        return "to_char"
    if isinstance(expr, EpochDiff):
        return "extract"
    return "?column?"


def _static_kind(expr: Expr) -> ColumnKind:
    if isinstance(expr, (NumberLit, CountStar, EpochDiff, Cast)):
        return ColumnKind.NUMBER
    if isinstance(expr, FuncCall):
        if expr.name in ("AVG", "SUM", "COUNT"):
            return ColumnKind.NUMBER
        if expr.args:
            return _static_kind(expr.args[0])
        return ColumnKind.TEXT
    if isinstance(expr, BinaryOp) and expr.op in ("+", "-", "*", "/"):
        return ColumnKind.NUMBER
    return ColumnKind.TEXT


def _to_output(value):
    if isinstance(value, MissingKey):
        return None
    if isinstance(value, JsonScalar):
        return value.canonical()
    if isinstance(value, datetime):
        return value.isoformat()
    if value is True:
        return "true"
    if value is False:
        return "false"
    return value

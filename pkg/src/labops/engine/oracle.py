"""Deliberately naive reference evaluator, used only by tests.

Re-implements query semantics with nested loops and linear searches,
sharing no evaluation code with the main engine; discrepancies between
the two are bugs by definition. Capped at 1,000 input rows.
"""

from __future__ import annotations

import json
from decimal import Decimal, InvalidOperation
from datetime import datetime

from ..schema import (
    JOBS_SCHEMA,
    ColumnKind,
    ColumnType,
    JobRecord,
    ResultColumn,
    ResultSet,
    parse_timestamp,
)
from ..sql.nodes import (
    TO_CHAR_PATTERNS,
    BinaryOp,
    Cast,
    ColumnRef,
    CountStar,
    EpochDiff,
    FuncCall,
    IsNull,
    JsonAccess,
    NumberLit,
    OrderItem,
    QueryAst,
    TextLit,
    ToChar,
)
from .errors import ExecutionError

_COLUMN_TYPES = {c.name: c.data_type for c in JOBS_SCHEMA.columns}


class _Missing:
    """A JSONB key that was absent (or accessed on a non-object)."""

    def __init__(self, column, key):
        self.column = column
        self.key = key


class _Json:
    """A JSON value produced by '->'."""

    def __init__(self, value):
        self.value = value


def _is_null(value) -> bool:
    return value is None or isinstance(value, _Missing)


def oracle_evaluate(ast: QueryAst, rows: list[JobRecord]) -> ResultSet:
    if len(rows) > 1000:
        raise ValueError("oracle_evaluate is capped at 1,000 rows")
    _bind_check(ast)
    ast = _resolve_aliases(ast)

    kept = []
    for record in rows:
        if ast.where is None:
            kept.append(record)
        else:
            verdict = _eval_scalar(ast.where, record)
            if verdict is True:
                kept.append(record)

    grouped = bool(ast.group_by) or _query_has_aggregate(ast)
    if grouped:
        out_rows = _eval_grouped(ast, kept)
    else:
        out_rows = _eval_projection(ast, kept)

    out_rows = _order_rows(ast, out_rows)
    if ast.limit is not None:
        out_rows = out_rows[: ast.limit]

    columns = tuple(
        ResultColumn(name=_output_name(item), kind=_output_kind(item.expr))
        for item in ast.select_items
    )
    final = tuple(tuple(_to_output(v) for v in row[: len(columns)]) for row in out_rows)
    return ResultSet(columns=columns, rows=final)


# -- binding -----------------------------------------------------------


def _walk(expr):
    yield expr
    if isinstance(expr, FuncCall):
        for a in expr.args:
            yield from _walk(a)
    elif isinstance(expr, ToChar):
        yield from _walk(expr.arg)
    elif isinstance(expr, EpochDiff):
        yield from _walk(expr.left)
        yield from _walk(expr.right)
    elif isinstance(expr, BinaryOp):
        yield from _walk(expr.left)
        yield from _walk(expr.right)
    elif isinstance(expr, IsNull):
        yield from _walk(expr.arg)
    elif isinstance(expr, Cast):
        yield from _walk(expr.arg)


def _has_aggregate(expr) -> bool:
    for node in _walk(expr):
        if isinstance(node, CountStar):
            return True
        if isinstance(node, FuncCall) and node.name in ("AVG", "COUNT", "SUM", "MIN", "MAX"):
            return True
    return False


def _query_has_aggregate(ast: QueryAst) -> bool:
    for item in ast.select_items:
        if _has_aggregate(item.expr):
            return True
    for item in ast.order_by:
        if _has_aggregate(item.expr):
            return True
    return False


def _all_tops(ast: QueryAst):
    for item in ast.select_items:
        yield item.expr
    if ast.where is not None:
        yield ast.where
    for e in ast.group_by:
        yield e
    for item in ast.order_by:
        yield item.expr


def _bind_check(ast: QueryAst) -> None:
    resolved = _resolve_aliases(ast)
    for top in _all_tops(resolved):
        for node in _walk(top):
            if isinstance(node, ColumnRef) and node.name not in _COLUMN_TYPES:
                raise ExecutionError(f'column "{node.name}" does not exist', phase="bind")
            if isinstance(node, JsonAccess):
                if node.column not in _COLUMN_TYPES:
                    raise ExecutionError(f'column "{node.column}" does not exist', phase="bind")
                if _COLUMN_TYPES[node.column] != ColumnType.JSONB:
                    raise ExecutionError(
                        f'column "{node.column}" is not JSONB', phase="bind"
                    )
            if isinstance(node, ToChar) and node.pattern not in TO_CHAR_PATTERNS:
                raise ExecutionError(
                    f'unsupported TO_CHAR pattern "{node.pattern}"', phase="bind"
                )
            if isinstance(node, FuncCall) and node.name in ("AVG", "COUNT", "SUM", "MIN", "MAX"):
                for a in node.args:
                    if _has_aggregate(a):
                        raise ExecutionError("aggregate calls cannot be nested", phase="bind")
    if ast.where is not None and _has_aggregate(ast.where):
        raise ExecutionError("aggregates are not allowed in WHERE", phase="bind")
    for e in resolved.group_by:
        if _has_aggregate(e):
            raise ExecutionError("aggregates are not allowed in GROUP BY", phase="bind")
        if isinstance(e, (NumberLit, TextLit)):
            raise ExecutionError("cannot GROUP BY a literal", phase="bind")
    for item in resolved.order_by:
        if isinstance(item.expr, NumberLit):
            raise ExecutionError("ORDER BY ordinals are not supported", phase="bind")
    if resolved.group_by or _query_has_aggregate(resolved):
        for item in resolved.select_items:
            _check_grouped_expr(item.expr, resolved.group_by)
        for item in resolved.order_by:
            _check_grouped_expr(item.expr, resolved.group_by)


def _check_grouped_expr(expr, group_keys) -> None:
    for key in group_keys:
        if expr == key:
            return
    if isinstance(expr, (TextLit, NumberLit, CountStar)):
        return
    if isinstance(expr, FuncCall) and expr.name in ("AVG", "COUNT", "SUM", "MIN", "MAX"):
        return
    if isinstance(expr, (ColumnRef, JsonAccess)):
        name = expr.name if isinstance(expr, ColumnRef) else expr.column
        raise ExecutionError(
            f'column "{name}" must appear in the GROUP BY clause or be used in an aggregate function',
            phase="bind",
        )
    if isinstance(expr, FuncCall):
        for a in expr.args:
            _check_grouped_expr(a, group_keys)
        return
    if isinstance(expr, ToChar):
        _check_grouped_expr(expr.arg, group_keys)
        return
    if isinstance(expr, EpochDiff):
        _check_grouped_expr(expr.left, group_keys)
        _check_grouped_expr(expr.right, group_keys)
        return
    if isinstance(expr, BinaryOp):
        _check_grouped_expr(expr.left, group_keys)
        _check_grouped_expr(expr.right, group_keys)
        return
    if isinstance(expr, IsNull):
        _check_grouped_expr(expr.arg, group_keys)
        return
    if isinstance(expr, Cast):
        _check_grouped_expr(expr.arg, group_keys)
        return


def _resolve_aliases(ast: QueryAst) -> QueryAst:
    alias_map = {}
    for item in ast.select_items:
        if item.alias is not None:
            alias_map[item.alias] = item.expr
    new_group = []
    for e in ast.group_by:
        if isinstance(e, ColumnRef) and e.name in alias_map and e.name not in _COLUMN_TYPES:
            new_group.append(alias_map[e.name])
        else:
            new_group.append(e)
    new_order = []
    for item in ast.order_by:
        e = item.expr
        if isinstance(e, ColumnRef) and e.name in alias_map:
            e = alias_map[e.name]
        new_order.append(OrderItem(e, item.descending))
    return QueryAst(
        select_items=ast.select_items,
        from_table=ast.from_table,
        where=ast.where,
        group_by=tuple(new_group),
        order_by=tuple(new_order),
        limit=ast.limit,
    )


# -- scalar evaluation over one record ----------------------------------


def _eval_scalar(expr, record: JobRecord):
    if isinstance(expr, ColumnRef):
        return getattr(record, expr.name)
    if isinstance(expr, TextLit):
        return expr.value
    if isinstance(expr, NumberLit):
        return expr.value
    if isinstance(expr, JsonAccess):
        container = getattr(record, expr.column)
        if container is None:
            return None
        if not isinstance(container, dict) or expr.key not in container:
            return _Missing(expr.column, expr.key)
        value = container[expr.key]
        if value is None:
            return None
        if expr.as_text:
            return _json_to_text(value)
        return _Json(value)
    if isinstance(expr, Cast):
        return _cast_number(_eval_scalar(expr.arg, record))
    if isinstance(expr, ToChar):
        return _to_char(_eval_scalar(expr.arg, record), expr.pattern)
    if isinstance(expr, EpochDiff):
        left = _coerce_timestamp(_eval_scalar(expr.left, record))
        right = _coerce_timestamp(_eval_scalar(expr.right, record))
        if _is_null(left) or _is_null(right):
            return None
        return _interval_seconds(left, right)
    if isinstance(expr, IsNull):
        null = _is_null(_eval_scalar(expr.arg, record))
        return (not null) if expr.negated else null
    if isinstance(expr, BinaryOp):
        return _eval_binary(expr, record)
    if isinstance(expr, FuncCall):
        if expr.name == "COALESCE":
            for a in expr.args:
                value = _eval_scalar(a, record)
                if not _is_null(value):
                    return value
            return None
        raise ExecutionError(f"aggregate {expr.name} used outside a grouped context")
    if isinstance(expr, CountStar):
        raise ExecutionError("COUNT(*) used outside a grouped context")
    raise ExecutionError(f"cannot evaluate expression {expr!r}")


def _eval_binary(expr: BinaryOp, record: JobRecord):
    if expr.op in ("AND", "OR"):
        left = _eval_scalar(expr.left, record)
        right = _eval_scalar(expr.right, record)
        return _kleene(expr.op, _as_bool(left), _as_bool(right))
    left = _eval_scalar(expr.left, record)
    right = _eval_scalar(expr.right, record)
    if expr.op in ("+", "-", "*", "/"):
        if _is_null(left) or _is_null(right):
            return None
        if isinstance(left, datetime) or isinstance(right, datetime):
            raise ExecutionError(
                "timestamp arithmetic is only supported inside EXTRACT(EPOCH FROM (ts2 - ts1))"
            )
        if not isinstance(left, Decimal) or not isinstance(right, Decimal):
            raise ExecutionError(f"operator {expr.op} requires numeric operands")
        if expr.op == "+":
            return left + right
        if expr.op == "-":
            return left - right
        if expr.op == "*":
            return left * right
        if right == 0:
            raise ExecutionError("division by zero")
        return left / right
    # comparison
    if _is_null(left) or _is_null(right):
        return None
    left, right = _comparable_pair(left, right)
    op = expr.op
    if op == "=":
        return left == right
    if op in ("!=", "<>"):
        return left != right
    try:
        if op == "<":
            return left < right
        if op == "<=":
            return left <= right
        if op == ">":
            return left > right
        if op == ">=":
            return left >= right
    except TypeError:
        raise ExecutionError("cannot order these value types") from None
    raise ExecutionError(f"unknown operator {op}")


def _comparable_pair(left, right):
    if isinstance(left, _Json) or isinstance(right, _Json):
        raise ExecutionError("JSON values cannot be compared; use '->>' for text")
    if isinstance(left, datetime) and isinstance(right, str):
        return left, _parse_ts_text(right)
    if isinstance(right, datetime) and isinstance(left, str):
        return _parse_ts_text(left), right
    if type(left) is bool or type(right) is bool:
        if type(left) is bool and type(right) is bool:
            return left, right
        raise ExecutionError("cannot compare boolean with non-boolean")
    if isinstance(left, Decimal) != isinstance(right, Decimal):
        raise ExecutionError("cannot compare a number with text")
    return left, right


def _parse_ts_text(text: str) -> datetime:
    try:
        return parse_timestamp(text)
    except ValueError:
        raise ExecutionError(f"invalid timestamp text {text!r}") from None


def _kleene(op: str, left, right):
    if op == "AND":
        if left is False or right is False:
            return False
        if left is None or right is None:
            return None
        return True
    if left is True or right is True:
        return True
    if left is None or right is None:
        return None
    return False


def _as_bool(value):
    if _is_null(value):
        return None
    if type(value) is bool:
        return value
    raise ExecutionError("argument of AND/OR must be boolean")


def _json_to_text(value) -> str:
    if isinstance(value, str):
        return value
    if value is True:
        return "true"
    if value is False:
        return "false"
    return json.dumps(value, ensure_ascii=False, separators=(",", ":"))


def _cast_number(value):
    if isinstance(value, _Missing):
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


def _coerce_timestamp(value):
    if _is_null(value):
        return None
    if isinstance(value, datetime):
        return value
    if isinstance(value, str):
        return _parse_ts_text(value)
    raise ExecutionError("expected a timestamp value")


def _interval_seconds(left: datetime, right: datetime) -> Decimal:
    td = left - right
    micros = (td.days * 86_400 + td.seconds) * 1_000_000 + td.microseconds
    return Decimal(micros) / Decimal(1_000_000)


def _to_char(value, pattern: str):
    value = _coerce_timestamp(value)
    if value is None:
        return None
    if pattern == "YYYY-MM-DD":
        return f"{value.year:04d}-{value.month:02d}-{value.day:02d}"
    if pattern == 'YYYY-"W"WW':
        week = (value.timetuple().tm_yday - 1) // 7 + 1
        return f"{value.year:04d}-W{week:02d}"
    raise ExecutionError(f'unsupported TO_CHAR pattern "{pattern}"', phase="bind")


# -- grouped evaluation --------------------------------------------------


def _group_key_token(value):
    if _is_null(value):
        return ("null",)
    if isinstance(value, _Json):
        return ("json", json.dumps(value.value, sort_keys=True, separators=(",", ":")))
    if isinstance(value, Decimal):
        return ("number", value)
    if isinstance(value, datetime):
        return ("timestamp", value)
    if type(value) is bool:
        return ("bool", value)
    return ("text", value)


def _eval_grouped(ast: QueryAst, records: list[JobRecord]):
    # Linear-search grouping: list of (key-token tuple, member records).
    groups: list[tuple[tuple, list[JobRecord]]] = []
    if ast.group_by:
        for record in records:
            key = tuple(_group_key_token(_eval_scalar(e, record)) for e in ast.group_by)
            for existing_key, members in groups:
                if existing_key == key:
                    members.append(record)
                    break
            else:
                groups.append((key, [record]))
    else:
        groups.append(((), list(records)))  # single global group, even when empty

    rows = []
    for _, members in groups:
        values = [_eval_in_group(item.expr, members, ast.group_by) for item in ast.select_items]
        values += [_eval_in_group(item.expr, members, ast.group_by) for item in ast.order_by]
        rows.append(tuple(values))
    return rows


def _eval_in_group(expr, members: list[JobRecord], group_keys):
    for key in group_keys:
        if expr == key:
            return _eval_scalar(expr, members[0])
    if isinstance(expr, CountStar):
        return Decimal(len(members))
    if isinstance(expr, FuncCall) and expr.name in ("AVG", "COUNT", "SUM", "MIN", "MAX"):
        return _eval_aggregate(expr, members)
    if isinstance(expr, (TextLit, NumberLit)):
        return expr.value
    if isinstance(expr, FuncCall):  # COALESCE over group-computable args
        for a in expr.args:
            value = _eval_in_group(a, members, group_keys)
            if not _is_null(value):
                return value
        return None
    if isinstance(expr, ToChar):
        return _to_char(_eval_in_group(expr.arg, members, group_keys), expr.pattern)
    if isinstance(expr, Cast):
        return _cast_number(_eval_in_group(expr.arg, members, group_keys))
    if isinstance(expr, EpochDiff):
        left = _coerce_timestamp(_eval_in_group(expr.left, members, group_keys))
        right = _coerce_timestamp(_eval_in_group(expr.right, members, group_keys))
        if left is None or right is None:
            return None
        return _interval_seconds(left, right)
    if isinstance(expr, IsNull):
        null = _is_null(_eval_in_group(expr.arg, members, group_keys))
        return (not null) if expr.negated else null
    if isinstance(expr, BinaryOp):
        left = _eval_in_group(expr.left, members, group_keys)
        right = _eval_in_group(expr.right, members, group_keys)
        return _combine_binary(expr.op, left, right)
    raise ExecutionError("expression is not computable in a grouped query", phase="bind")


def _combine_binary(op: str, left, right):
    if op in ("AND", "OR"):
        return _kleene(op, _as_bool(left), _as_bool(right))
    if op in ("+", "-", "*", "/"):
        if _is_null(left) or _is_null(right):
            return None
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
    if _is_null(left) or _is_null(right):
        return None
    left, right = _comparable_pair(left, right)
    try:
        return {
            "=": left == right,
            "!=": left != right,
            "<>": left != right,
            "<": left < right,
            "<=": left <= right,
            ">": left > right,
            ">=": left >= right,
        }[op]
    except TypeError:
        raise ExecutionError("cannot order these value types") from None


def _eval_aggregate(expr: FuncCall, members: list[JobRecord]):
    if expr.name == "COUNT":
        n = 0
        for record in members:
            if not _is_null(_eval_scalar(expr.args[0], record)):
                n += 1
        return Decimal(n)
    values = []
    for record in members:
        value = _eval_scalar(expr.args[0], record)
        if not _is_null(value):
            values.append(value)
    if not values:
        return None
    if expr.name in ("SUM", "AVG"):
        total = Decimal(0)
        for v in values:
            if not isinstance(v, Decimal):
                raise ExecutionError(f"{expr.name} requires numeric inputs")
            total += v
        if expr.name == "SUM":
            return total
        return total / Decimal(len(values))
    # MIN / MAX by repeated linear scan
    best = values[0]
    for v in values[1:]:
        a, b = _comparable_pair(v, best)
        try:
            smaller = a < b
        except TypeError:
            raise ExecutionError("cannot order these value types") from None
        if (expr.name == "MIN" and smaller) or (expr.name == "MAX" and not smaller and a != b):
            best = v
    return best


# -- projection, ordering, output ----------------------------------------


def _eval_projection(ast: QueryAst, records: list[JobRecord]):
    rows = []
    for record in records:
        values = [_eval_scalar(item.expr, record) for item in ast.select_items]
        values += [_eval_scalar(item.expr, record) for item in ast.order_by]
        rows.append(tuple(values))
    return rows


def _order_rows(ast: QueryAst, rows):
    if not ast.order_by:
        return rows
    width = len(ast.select_items)
    ordered = list(rows)
    for offset in range(len(ast.order_by) - 1, -1, -1):
        item = ast.order_by[offset]

        def sort_key(row, _i=width + offset):
            value = row[_i]
            if _is_null(value):
                return (1, _OrderToken(None))
            return (0, _OrderToken(value))

        ordered = sorted(ordered, key=sort_key, reverse=item.descending)
    return ordered


class _OrderToken:
    """Comparable wrapper that surfaces type mismatches as query errors."""

    __slots__ = ("value",)

    def __init__(self, value):
        self.value = value

    def __lt__(self, other):
        a, b = self.value, other.value
        if a is None or b is None:
            return False  # nulls already segregated by the outer key
        if isinstance(a, _Json) or isinstance(b, _Json):
            raise ExecutionError("JSON values cannot be ordered; use '->>' for text")
        if isinstance(a, datetime) and isinstance(b, str):
            b = _parse_ts_text(b)
        elif isinstance(b, datetime) and isinstance(a, str):
            a = _parse_ts_text(a)
        try:
            return a < b
        except TypeError:
            raise ExecutionError("cannot order these value types") from None


def _output_name(item) -> str:
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


def _output_kind(expr) -> ColumnKind:
    if isinstance(expr, (NumberLit, CountStar, EpochDiff, Cast)):
        return ColumnKind.NUMBER
    if isinstance(expr, FuncCall):
        if expr.name in ("AVG", "SUM", "COUNT"):
            return ColumnKind.NUMBER
        if expr.args:
            return _output_kind(expr.args[0])
        return ColumnKind.TEXT
    if isinstance(expr, BinaryOp) and expr.op in ("+", "-", "*", "/"):
        return ColumnKind.NUMBER
    return ColumnKind.TEXT


def _to_output(value):
    if isinstance(value, _Missing):
        return None
    if isinstance(value, _Json):
        return json.dumps(value.value, ensure_ascii=False, separators=(",", ":"))
    if isinstance(value, datetime):
        return value.isoformat()
    if value is True:
        return "true"
    if value is False:
        return "false"
    return value

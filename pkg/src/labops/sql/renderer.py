"""Canonical SQL text for an AST: deterministic, reparses to an equal tree."""

from __future__ import annotations

from .nodes import (
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
)


def _quote_text(value: str) -> str:
    return "'" + value.replace("'", "''") + "'"


def _operand(expr: Expr) -> str:
    """Render a sub-expression, parenthesizing the loosely-binding forms."""
    text = render_expr(expr)
    if isinstance(expr, (BinaryOp, IsNull)):
        return f"({text})"
    return text


def render_expr(expr: Expr) -> str:
    if isinstance(expr, ColumnRef):
        return expr.name
    if isinstance(expr, TextLit):
        return _quote_text(expr.value)
    if isinstance(expr, NumberLit):
        return str(expr.value)
    if isinstance(expr, FuncCall):
        return f"{expr.name}({', '.join(render_expr(a) for a in expr.args)})"
    if isinstance(expr, CountStar):
        return "COUNT(*)"
    if isinstance(expr, ToChar):
        return f"TO_CHAR({render_expr(expr.arg)}, {_quote_text(expr.pattern)})"
    if isinstance(expr, EpochDiff):
        return f"EXTRACT(EPOCH FROM ({_operand(expr.left)} - {_operand(expr.right)}))"
    if isinstance(expr, BinaryOp):
        return f"{_operand(expr.left)} {expr.op} {_operand(expr.right)}"
    if isinstance(expr, IsNull):
        op = "IS NOT NULL" if expr.negated else "IS NULL"
        return f"{_operand(expr.arg)} {op}"
    if isinstance(expr, JsonAccess):
        op = "->>" if expr.as_text else "->"
        return f"{expr.column} {op} {_quote_text(expr.key)}"
    if isinstance(expr, Cast):
        arg = render_expr(expr.arg)
        if not isinstance(expr.arg, (ColumnRef, NumberLit, TextLit, FuncCall, CountStar, ToChar, Cast)):
            arg = f"({arg})"
        return f"{arg}::{expr.target}"
    raise TypeError(f"unknown expression node: {expr!r}")


def render(ast: QueryAst) -> str:
    """Deterministic canonical SQL; parse(render(ast)) == ast."""
    parts = ["SELECT " + ", ".join(_render_select_item(i) for i in ast.select_items)]
    parts.append(f"FROM {ast.from_table}")
    if ast.where is not None:
        parts.append(f"WHERE {render_expr(ast.where)}")
    if ast.group_by:
        parts.append("GROUP BY " + ", ".join(render_expr(e) for e in ast.group_by))
    if ast.order_by:
        parts.append("ORDER BY " + ", ".join(_render_order_item(i) for i in ast.order_by))
    if ast.limit is not None:
        parts.append(f"LIMIT {ast.limit}")
    return " ".join(parts)


def _render_select_item(item: SelectItem) -> str:
    text = render_expr(item.expr)
    if item.alias:
        return f"{text} AS {item.alias}"
    return text


def _render_order_item(item: OrderItem) -> str:
    text = render_expr(item.expr)
    if item.descending:
        return f"{text} DESC"
    return text

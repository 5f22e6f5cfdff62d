"""AST node types for the constrained SELECT subset.

All nodes are frozen dataclasses so structural equality and hashing come
for free; parse/render round-trips are checked with plain ``==``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from decimal import Decimal
from typing import Optional, Union

AGGREGATE_FUNCS = frozenset({"AVG", "COUNT", "SUM", "MIN", "MAX"})
CAST_TARGETS = frozenset({"FLOAT", "NUMERIC"})
TO_CHAR_PATTERNS = frozenset({"YYYY-MM-DD", 'YYYY-"W"WW'})


@dataclass(frozen=True)
class ColumnRef:
    name: str


@dataclass(frozen=True)
class TextLit:
    value: str


@dataclass(frozen=True)
class NumberLit:
    value: Decimal


@dataclass(frozen=True)
class FuncCall:
    """COALESCE or an aggregate (AVG/COUNT/SUM/MIN/MAX) with expression args."""

    name: str
    args: tuple["Expr", ...]

    @property
    def is_aggregate(self) -> bool:
        return self.name in AGGREGATE_FUNCS


@dataclass(frozen=True)
class CountStar:
    pass


@dataclass(frozen=True)
class ToChar:
    arg: "Expr"
    pattern: str


@dataclass(frozen=True)
class EpochDiff:
    """EXTRACT(EPOCH FROM (left - right)) — timestamp difference in seconds."""

    left: "Expr"
    right: "Expr"


@dataclass(frozen=True)
class BinaryOp:
    op: str  # + - * / = != <> < <= > >= AND OR
    left: "Expr"
    right: "Expr"


@dataclass(frozen=True)
class IsNull:
    arg: "Expr"
    negated: bool = False


@dataclass(frozen=True)
class JsonAccess:
    """Top-level JSONB key access on a column: ``->`` (JSON) or ``->>`` (text)."""

    column: str
    key: str
    as_text: bool


@dataclass(frozen=True)
class Cast:
    arg: "Expr"
    target: str  # FLOAT | NUMERIC


Expr = Union[
    ColumnRef,
    TextLit,
    NumberLit,
    FuncCall,
    CountStar,
    ToChar,
    EpochDiff,
    BinaryOp,
    IsNull,
    JsonAccess,
    Cast,
]


@dataclass(frozen=True)
class SelectItem:
    expr: Expr
    alias: Optional[str] = None


@dataclass(frozen=True)
class OrderItem:
    expr: Expr
    descending: bool = False


@dataclass(frozen=True)
class QueryAst:
    select_items: tuple[SelectItem, ...]
    from_table: str
    where: Optional[Expr] = None
    group_by: tuple[Expr, ...] = field(default_factory=tuple)
    order_by: tuple[OrderItem, ...] = field(default_factory=tuple)
    limit: Optional[int] = None


def walk(expr: Expr):
    """Yield *expr* and every sub-expression, depth first."""
    yield expr
    if isinstance(expr, FuncCall):
        for arg in expr.args:
            yield from walk(arg)
    elif isinstance(expr, ToChar):
        yield from walk(expr.arg)
    elif isinstance(expr, EpochDiff):
        yield from walk(expr.left)
        yield from walk(expr.right)
    elif isinstance(expr, BinaryOp):
        yield from walk(expr.left)
        yield from walk(expr.right)
    elif isinstance(expr, IsNull):
        yield from walk(expr.arg)
    elif isinstance(expr, Cast):
        yield from walk(expr.arg)


def contains_aggregate(expr: Expr) -> bool:
    return any(
        isinstance(node, CountStar) or (isinstance(node, FuncCall) and node.is_aggregate)
        for node in walk(expr)
    )


def query_exprs(ast: QueryAst):
    """Yield every top-level expression slot in the query."""
    for item in ast.select_items:
        yield item.expr
    if ast.where is not None:
        yield ast.where
    yield from ast.group_by
    for item in ast.order_by:
        yield item.expr

"""Recursive-descent parser for the constrained SELECT subset.

Accepts exactly the constructs the pipeline's prompt contract allows:
one top-level SELECT over one table, WHERE, GROUP BY, ORDER BY, LIMIT,
the fixed function set, top-level JSONB key access, and ::FLOAT/::NUMERIC
casts. Everything else is a ParseError with a byte offset.
"""

from __future__ import annotations

from decimal import Decimal
from typing import Optional

from .lexer import KEYWORDS, ParseError, Token, TokenType, tokenize
from .nodes import (
    AGGREGATE_FUNCS,
    CAST_TARGETS,
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

_KNOWN_FUNCS = AGGREGATE_FUNCS | {"COALESCE", "TO_CHAR", "EXTRACT"}
_COMPARISON_OPS = {
    TokenType.EQ: "=",
    TokenType.NEQ: "!=",
    TokenType.LT: "<",
    TokenType.LTE: "<=",
    TokenType.GT: ">",
    TokenType.GTE: ">=",
}


def parse(sql: str) -> QueryAst:
    """Parse *sql*, raising ParseError for anything outside the subset."""
    return _Parser(tokenize(sql)).parse_query()


class _Parser:
    def __init__(self, tokens: list[Token]):
        self._tokens = tokens
        self._pos = 0

    # -- token plumbing ------------------------------------------------

    def _peek(self) -> Token:
        return self._tokens[self._pos]

    def _advance(self) -> Token:
        tok = self._tokens[self._pos]
        if tok.type != TokenType.EOF:
            self._pos += 1
        return tok

    def _check(self, type_: TokenType) -> bool:
        return self._peek().type == type_

    def _match(self, type_: TokenType) -> Optional[Token]:
        if self._check(type_):
            return self._advance()
        return None

    def _match_keyword(self, word: str) -> Optional[Token]:
        tok = self._peek()
        if tok.type == TokenType.KEYWORD and tok.keyword() == word:
            return self._advance()
        return None

    def _expect(self, type_: TokenType, what: str) -> Token:
        tok = self._peek()
        if tok.type != type_:
            raise ParseError(tok.offset, f"expected {what}, got {tok.text or 'end of input'!r}")
        return self._advance()

    def _expect_keyword(self, word: str) -> Token:
        tok = self._peek()
        if tok.type != TokenType.KEYWORD or tok.keyword() != word:
            raise ParseError(tok.offset, f"expected {word}, got {tok.text or 'end of input'!r}")
        return self._advance()

    # -- grammar -------------------------------------------------------

    def parse_query(self) -> QueryAst:
        tok = self._peek()
        if tok.type == TokenType.KEYWORD and tok.keyword() == "WITH":
            raise ParseError(tok.offset, "WITH clauses / CTEs are not supported")
        self._expect_keyword("SELECT")

        select_items = self._parse_select_list()
        self._expect_keyword("FROM")
        if self._check(TokenType.LPAREN):
            raise ParseError(self._peek().offset, "subqueries are not supported")
        from_table = self._expect(TokenType.IDENT, "table name").text

        where = None
        if self._match_keyword("WHERE"):
            where = self._parse_expr()

        group_by: tuple[Expr, ...] = ()
        if self._match_keyword("GROUP"):
            self._expect_keyword("BY")
            group_by = tuple(self._parse_expr_list())

        order_by: list[OrderItem] = []
        if self._match_keyword("ORDER"):
            self._expect_keyword("BY")
            while True:
                expr = self._parse_expr()
                descending = False
                if self._match_keyword("DESC"):
                    descending = True
                else:
                    self._match_keyword("ASC")
                order_by.append(OrderItem(expr, descending))
                if not self._match(TokenType.COMMA):
                    break

        limit = None
        if self._match_keyword("LIMIT"):
            tok = self._expect(TokenType.NUMBER, "integer LIMIT")
            if "." in tok.text:
                raise ParseError(tok.offset, "LIMIT must be an integer")
            limit = int(tok.text)

        self._match(TokenType.SEMICOLON)
        tok = self._peek()
        if tok.type != TokenType.EOF:
            if tok.type == TokenType.SEMICOLON or (
                tok.type == TokenType.KEYWORD and tok.keyword() == "SELECT"
            ):
                raise ParseError(tok.offset, "multiple statements are not supported")
            raise ParseError(tok.offset, f"unexpected trailing input {tok.text!r}")

        return QueryAst(
            select_items=tuple(select_items),
            from_table=from_table,
            where=where,
            group_by=group_by,
            order_by=tuple(order_by),
            limit=limit,
        )

    def _parse_select_list(self) -> list[SelectItem]:
        if self._check(TokenType.STAR):
            raise ParseError(self._peek().offset, "SELECT * is not supported; name 2-3 columns")
        items = []
        while True:
            expr = self._parse_expr()
            alias = None
            if self._match_keyword("AS"):
                alias = self._expect(TokenType.IDENT, "alias name").text
            tok = self._peek()
            if tok.type == TokenType.IDENT and tok.keyword() == "OVER":
                raise ParseError(tok.offset, "window functions are not supported")
            items.append(SelectItem(expr, alias))
            if not self._match(TokenType.COMMA):
                break
        return items

    def _parse_expr_list(self) -> list[Expr]:
        exprs = [self._parse_expr()]
        while self._match(TokenType.COMMA):
            exprs.append(self._parse_expr())
        return exprs

    # Precedence: OR < AND < comparison/IS NULL < additive < multiplicative < postfix.

    def _parse_expr(self) -> Expr:
        expr = self._parse_and()
        while self._match_keyword("OR"):
            expr = BinaryOp("OR", expr, self._parse_and())
        return expr

    def _parse_and(self) -> Expr:
        expr = self._parse_comparison()
        while self._match_keyword("AND"):
            expr = BinaryOp("AND", expr, self._parse_comparison())
        return expr

    def _parse_comparison(self) -> Expr:
        expr = self._parse_additive()
        tok = self._peek()
        if tok.type in _COMPARISON_OPS:
            self._advance()
            return BinaryOp(_COMPARISON_OPS[tok.type], expr, self._parse_additive())
        if self._match_keyword("IS"):
            negated = bool(self._match_keyword("NOT"))
            self._expect_keyword("NULL")
            return IsNull(expr, negated)
        return expr

    def _parse_additive(self) -> Expr:
        expr = self._parse_multiplicative()
        while True:
            if self._match(TokenType.PLUS):
                expr = BinaryOp("+", expr, self._parse_multiplicative())
            elif self._match(TokenType.MINUS):
                expr = BinaryOp("-", expr, self._parse_multiplicative())
            else:
                return expr

    def _parse_multiplicative(self) -> Expr:
        expr = self._parse_postfix()
        while True:
            if self._match(TokenType.STAR):
                expr = BinaryOp("*", expr, self._parse_postfix())
            elif self._match(TokenType.SLASH):
                expr = BinaryOp("/", expr, self._parse_postfix())
            else:
                return expr

    def _parse_postfix(self) -> Expr:
        expr, parenthesized = self._parse_primary()
        while True:
            tok = self._peek()
            if tok.type in (TokenType.ARROW, TokenType.ARROW_TEXT):
                self._advance()
                if isinstance(expr, JsonAccess):
                    raise ParseError(tok.offset, "JSONB access is limited to one top-level key")
                if not isinstance(expr, ColumnRef):
                    raise ParseError(tok.offset, "JSONB access is only allowed on a column")
                key = self._expect(TokenType.STRING, "text key after JSONB operator")
                expr = JsonAccess(expr.name, key.text, as_text=tok.type == TokenType.ARROW_TEXT)
                parenthesized = False
            elif tok.type == TokenType.CAST_OP:
                if isinstance(expr, JsonAccess) and not parenthesized:
                    # PostgreSQL would bind :: to the key literal; require the
                    # unambiguous parenthesized form.
                    raise ParseError(
                        tok.offset, "parenthesize the JSONB access before casting, e.g. (col ->> 'k')::FLOAT"
                    )
                self._advance()
                target = self._expect(TokenType.IDENT, "cast target type")
                if target.keyword() not in CAST_TARGETS:
                    raise ParseError(target.offset, f"unsupported cast target {target.text!r}; use FLOAT or NUMERIC")
                expr = Cast(expr, target.keyword())
                parenthesized = False
            else:
                return expr

    def _parse_primary(self) -> tuple[Expr, bool]:
        """Returns (expr, was_parenthesized)."""
        tok = self._peek()
        if tok.type == TokenType.LPAREN:
            self._advance()
            expr = self._parse_expr()
            self._expect(TokenType.RPAREN, "')'")
            return expr, True
        if tok.type == TokenType.NUMBER:
            self._advance()
            return NumberLit(Decimal(tok.text)), False
        if tok.type == TokenType.MINUS:
            self._advance()
            num = self._expect(TokenType.NUMBER, "number after unary minus")
            return NumberLit(-Decimal(num.text)), False
        if tok.type == TokenType.STRING:
            self._advance()
            return TextLit(tok.text), False
        if tok.type == TokenType.IDENT:
            return self._parse_ident(), False
        if tok.type == TokenType.KEYWORD and tok.keyword() == "NULL":
            raise ParseError(tok.offset, "bare NULL literals are not supported; use IS NULL filters")
        if tok.type == TokenType.KEYWORD and tok.keyword() == "SELECT":
            raise ParseError(tok.offset, "subqueries are not supported")
        raise ParseError(tok.offset, f"expected expression, got {tok.text or 'end of input'!r}")

    def _parse_ident(self) -> Expr:
        tok = self._advance()
        name = tok.keyword()
        if not self._check(TokenType.LPAREN):
            return ColumnRef(tok.text)
        if name not in _KNOWN_FUNCS:
            raise ParseError(tok.offset, f"unknown function {tok.text!r}")
        self._advance()  # (
        if name == "EXTRACT":
            return self._parse_extract(tok)
        if name == "TO_CHAR":
            arg = self._parse_expr()
            self._expect(TokenType.COMMA, "','")
            pattern = self._expect(TokenType.STRING, "format pattern string")
            self._expect(TokenType.RPAREN, "')'")
            return ToChar(arg, pattern.text)
        if name == "COUNT" and self._check(TokenType.STAR):
            self._advance()
            self._expect(TokenType.RPAREN, "')'")
            return CountStar()
        args = tuple(self._parse_expr_list())
        self._expect(TokenType.RPAREN, "')'")
        if name in AGGREGATE_FUNCS and len(args) != 1:
            raise ParseError(tok.offset, f"{name} takes exactly one argument")
        return FuncCall(name, args)

    def _parse_extract(self, tok: Token) -> Expr:
        field = self._peek()
        if field.type != TokenType.IDENT or field.keyword() != "EPOCH":
            raise ParseError(field.offset, "only EXTRACT(EPOCH FROM (ts2 - ts1)) is supported")
        self._advance()
        self._expect_keyword("FROM")
        inner = self._parse_expr()
        self._expect(TokenType.RPAREN, "')'")
        if not (isinstance(inner, BinaryOp) and inner.op == "-"):
            raise ParseError(tok.offset, "EXTRACT(EPOCH FROM ...) requires a timestamp difference (ts2 - ts1)")
        return EpochDiff(inner.left, inner.right)

"""Tokenizer for the SELECT subset.

Keywords match case-insensitively; identifiers are case-sensitive
(lowercase PostgreSQL convention). ``--`` line comments are skipped.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass


class ParseError(Exception):
    """Syntax outside the subset, with the byte offset it was found at."""

    def __init__(self, offset: int, message: str):
        super().__init__(f"at offset {offset}: {message}")
        self.offset = offset
        self.message = message


class TokenType(enum.Enum):
    IDENT = "ident"
    NUMBER = "number"
    STRING = "string"
    KEYWORD = "keyword"
    LPAREN = "("
    RPAREN = ")"
    COMMA = ","
    STAR = "*"
    PLUS = "+"
    MINUS = "-"
    SLASH = "/"
    EQ = "="
    NEQ = "!="  # also <>
    LT = "<"
    LTE = "<="
    GT = ">"
    GTE = ">="
    ARROW = "->"
    ARROW_TEXT = "->>"
    CAST_OP = "::"
    SEMICOLON = ";"
    EOF = "eof"


KEYWORDS = frozenset(
    {
        "SELECT",
        "FROM",
        "WHERE",
        "GROUP",
        "ORDER",
        "BY",
        "ASC",
        "DESC",
        "LIMIT",
        "AS",
        "AND",
        "OR",
        "IS",
        "NOT",
        "NULL",
        "WITH",
    }
)


@dataclass(frozen=True)
class Token:
    type: TokenType
    text: str
    offset: int

    def keyword(self) -> str:
        """Uppercased text, for keyword and function-name comparisons."""
        return self.text.upper()


def _is_ident_start(ch: str) -> bool:
    return ch.isalpha() or ch == "_"


def _is_ident_char(ch: str) -> bool:
    return ch.isalnum() or ch == "_"


def tokenize(sql: str) -> list[Token]:
    tokens: list[Token] = []
    i = 0
    n = len(sql)
    while i < n:
        ch = sql[i]
        if ch.isspace():
            i += 1
            continue
        if ch == "-" and sql.startswith("--", i):
            end = sql.find("\n", i)
            i = n if end == -1 else end + 1
            continue
        if _is_ident_start(ch):
            start = i
            while i < n and _is_ident_char(sql[i]):
                i += 1
            text = sql[start:i]
            kind = TokenType.KEYWORD if text.upper() in KEYWORDS else TokenType.IDENT
            tokens.append(Token(kind, text, start))
            continue
        if ch.isdigit():
            start = i
            while i < n and sql[i].isdigit():
                i += 1
            if i < n and sql[i] == "." and i + 1 < n and sql[i + 1].isdigit():
                i += 1
                while i < n and sql[i].isdigit():
                    i += 1
            tokens.append(Token(TokenType.NUMBER, sql[start:i], start))
            continue
        if ch == "'":
            start = i
            i += 1
            parts: list[str] = []
            while True:
                if i >= n:
                    raise ParseError(start, "unterminated string literal")
                if sql[i] == "'":
                    if i + 1 < n and sql[i + 1] == "'":  # doubled quote escape
                        parts.append("'")
                        i += 2
                        continue
                    i += 1
                    break
                parts.append(sql[i])
                i += 1
            tokens.append(Token(TokenType.STRING, "".join(parts), start))
            continue
        # Multi-character operators, longest first.
        for text, kind in (
            ("->>", TokenType.ARROW_TEXT),
            ("->", TokenType.ARROW),
            ("::", TokenType.CAST_OP),
            ("<>", TokenType.NEQ),
            ("!=", TokenType.NEQ),
            ("<=", TokenType.LTE),
            (">=", TokenType.GTE),
        ):
            if sql.startswith(text, i):
                tokens.append(Token(kind, text, i))
                i += len(text)
                break
        else:
            single = {
                "(": TokenType.LPAREN,
                ")": TokenType.RPAREN,
                ",": TokenType.COMMA,
                "*": TokenType.STAR,
                "+": TokenType.PLUS,
                "-": TokenType.MINUS,
                "/": TokenType.SLASH,
                "=": TokenType.EQ,
                "<": TokenType.LT,
                ">": TokenType.GT,
                ";": TokenType.SEMICOLON,
            }.get(ch)
            if single is None:
                raise ParseError(i, f"unexpected character {ch!r}")
            tokens.append(Token(single, ch, i))
            i += 1
    tokens.append(Token(TokenType.EOF, "", n))
    return tokens

"""Recursive-descent parser for the expression grammar::

    expr   := term (("+"|"-") term)*
    term   := factor (("*"|"/") factor)*
    factor := unary ("^" factor)?
    unary  := "-" unary | atom
    atom   := number | ident | ident "(" expr ")" | "(" expr ")"

Multiplication must be written explicitly; ``sin x`` and ``2 x`` are errors.
"""

from __future__ import annotations

import re
from typing import Iterable, NamedTuple

from .nodes import FUNCTIONS, Add, Const, Div, Expr, Func, Mul, Neg, Pow, Sub, Var


class ParseError(ValueError):
    """Syntax or name error.  ``offset`` is a byte offset into the UTF-8 text."""

    def __init__(self, message: str, offset: int, text: str = ""):
        self.message = message
        self.offset = offset
        self.text = text
        super().__init__(f"{message} (at byte {offset})")


_NUMBER = re.compile(r"(?:\d+(?:\.\d*)?|\.\d+)(?:[eE][+-]?\d+)?")
_IDENT = re.compile(r"[A-Za-z_][A-Za-z0-9_]*")
_WS = re.compile(r"\s+")


class _Token(NamedTuple):
    kind: str  # "num", "id", "op", "end"
    text: str
    pos: int  # character index


def _tokenize(text: str) -> list[_Token]:
    tokens = []
    i, n = 0, len(text)
    while i < n:
        m = _WS.match(text, i)
        if m:
            i = m.end()
            continue
        m = _NUMBER.match(text, i)
        if m:
            tokens.append(_Token("num", m.group(), i))
            i = m.end()
            continue
        m = _IDENT.match(text, i)
        if m:
            tokens.append(_Token("id", m.group(), i))
            i = m.end()
            continue
        if text[i] in "+-*/^()":
            tokens.append(_Token("op", text[i], i))
            i += 1
            continue
        raise ParseError(f"unexpected character {text[i]!r}", _byte_offset(text, i), text)
    tokens.append(_Token("end", "", n))
    return tokens


def _byte_offset(text: str, char_index: int) -> int:
    return len(text[:char_index].encode("utf-8"))


class _Parser:
    def __init__(self, text: str, variables: frozenset[str]):
        self.text = text
        self.variables = variables
        self.tokens = _tokenize(text)
        self.i = 0

    @property
    def tok(self) -> _Token:
        return self.tokens[self.i]

    def error(self, message: str, tok: _Token | None = None) -> ParseError:
        tok = tok or self.tok
        return ParseError(message, _byte_offset(self.text, tok.pos), self.text)

    def accept(self, op: str) -> bool:
        if self.tok.kind == "op" and self.tok.text == op:
            self.i += 1
            return True
        return False

    def expect(self, op: str) -> None:
        if not self.accept(op):
            found = self.tok.text or "end of input"
            raise self.error(f"expected {op!r}, found {found!r}")

    def parse(self) -> Expr:
        if self.tok.kind == "end":
            raise self.error("empty expression")
        e = self.expr()
        if self.tok.kind != "end":
            if self.tok.kind in ("num", "id") or self.tok.text == "(":
                raise self.error(
                    f"unexpected {self.tok.text!r}: juxtaposition is not "
                    "multiplication, write '*' explicitly"
                )
            raise self.error(f"unexpected {self.tok.text!r}")
        return e

    def expr(self) -> Expr:
        e = self.term()
        while True:
            if self.accept("+"):
                e = Add(e, self.term())
            elif self.accept("-"):
                e = Sub(e, self.term())
            else:
                return e

    def term(self) -> Expr:
        e = self.factor()
        while True:
            if self.accept("*"):
                e = Mul(e, self.factor())
            elif self.accept("/"):
                e = Div(e, self.factor())
            else:
                return e

    def factor(self) -> Expr:
        base = self.unary()
        if self.accept("^"):
            return Pow(base, self.factor())
        return base

    def unary(self) -> Expr:
        if self.accept("-"):
            return Neg(self.unary())
        return self.atom()

    def atom(self) -> Expr:
        tok = self.tok
        if tok.kind == "num":
            self.i += 1
            return Const(float(tok.text))
        if tok.kind == "id":
            self.i += 1
            if tok.text in FUNCTIONS:
                if not self.accept("("):
                    raise self.error(
                        f"function {tok.text!r} must be followed by '(' "
                        "(arguments are not juxtaposed)"
                    )
                arg = self.expr()
                self.expect(")")
                return Func(tok.text, arg)
            if tok.text not in self.variables:
                raise self.error(f"unknown identifier {tok.text!r}", tok)
            return Var(tok.text)
        if self.accept("("):
            e = self.expr()
            self.expect(")")
            return e
        found = tok.text or "end of input"
        raise self.error(f"expected a number, name or '(', found {found!r}")


def parse(text: str, variables: Iterable[str] = ()) -> Expr:
    """Parse ``text`` into an expression over the declared ``variables``.

    >>> parse("2/x", {"x"})
    Div(Const(2.0), Var('x'))
    """
    names = frozenset(variables)
    clash = names & set(FUNCTIONS)
    if clash:
        raise ValueError(f"variable names shadow functions: {sorted(clash)}")
    return _Parser(text, names).parse()

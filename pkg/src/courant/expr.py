"""Parser for the polynomial expression language.

Grammar (whitespace is insignificant)::

    expr  := term (('+' | '-') term)*
    term  := unary (('*' | '/') unary)*
    unary := ('+' | '-') unary | power
    power := atom ('^' exponent)*
    atom  := INTEGER | IDENT | '(' expr ')'

Exponents are nonnegative integers.  Division is accepted by any nonzero
expression, which covers rational constants ``p/q`` and the rational-function
entries that connection data sometimes needs.

:func:`parse_form` additionally reads ``d<coord>`` as the coordinate
differential, with ``^`` between forms meaning the wedge product, e.g.
``w*dx^dy^dz``.
"""

from __future__ import annotations

import re
from dataclasses import dataclass

from .errors import CourantError, ExpressionSyntaxError, UnknownCoordinate
from .scalars import Chart, RationalScalar

__all__ = ["parse_scalar", "parse_form", "tokenize"]

_TOKEN = re.compile(r"\s*(?:(\d+)|([A-Za-z_][A-Za-z_0-9]*)|(.))")


@dataclass(frozen=True)
class Token:
    kind: str  # "int", "ident", "op", "end"
    text: str
    pos: int


def tokenize(text: str) -> list[Token]:
    out = []
    pos = 0
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if m.group(0).strip() == "":
            break
        start = m.start(m.lastindex)
        if m.group(1):
            out.append(Token("int", m.group(1), start))
        elif m.group(2):
            out.append(Token("ident", m.group(2), start))
        else:
            ch = m.group(3)
            if ch not in "+-*/^()":
                raise ExpressionSyntaxError(f"unexpected character {ch!r}", start)
            out.append(Token("op", ch, start))
        pos = m.end()
    out.append(Token("end", "", len(text)))
    return out


class _Parser:
    def __init__(self, text: str, chart: Chart, forms: bool):
        self.text = text
        self.chart = chart
        self.forms = forms
        self.toks = tokenize(text)
        self.i = 0

    @property
    def tok(self) -> Token:
        return self.toks[self.i]

    def eat(self, text: str) -> bool:
        if self.tok.kind == "op" and self.tok.text == text:
            self.i += 1
            return True
        return False

    def parse(self):
        if self.tok.kind == "end":
            raise ExpressionSyntaxError("empty expression", 0)
        val = self.expr()
        if self.tok.kind != "end":
            raise ExpressionSyntaxError(f"unexpected {self.tok.text!r}", self.tok.pos)
        return val

    def _combine(self, fn, pos):
        try:
            return fn()
        except CourantError as exc:
            if isinstance(exc, ExpressionSyntaxError):
                raise
            raise ExpressionSyntaxError(str(exc), pos) from None

    def expr(self):
        val = self.term()
        while True:
            pos = self.tok.pos
            if self.eat("+"):
                rhs = self.term()
                val = self._combine(lambda: val + rhs, pos)
            elif self.eat("-"):
                rhs = self.term()
                val = self._combine(lambda: val - rhs, pos)
            else:
                return val

    def term(self):
        val = self.unary()
        while True:
            pos = self.tok.pos
            if self.eat("*"):
                rhs = self.unary()
                val = self._combine(lambda: _mul(val, rhs), pos)
            elif self.eat("/"):
                rhs = self.unary()
                if not isinstance(rhs, RationalScalar):
                    raise ExpressionSyntaxError("cannot divide by a form", pos)
                if not rhs:
                    raise ExpressionSyntaxError("division by zero", pos)
                val = self._combine(lambda: val * rhs.inverse(), pos)
            else:
                return val

    def unary(self):
        if self.eat("-"):
            return -self.unary()
        if self.eat("+"):
            return self.unary()
        return self.power()

    def power(self):
        val = self.atom()
        while True:
            pos = self.tok.pos
            if not self.eat("^"):
                return val
            if isinstance(val, RationalScalar):
                if self.tok.kind == "op" and self.tok.text == "-":
                    raise ExpressionSyntaxError("negative exponents are not allowed", self.tok.pos)
                if self.tok.kind != "int":
                    raise ExpressionSyntaxError("exponent must be a nonnegative integer", self.tok.pos)
                val = val ** int(self.tok.text)
                self.i += 1
            else:
                rhs = self.atom()
                val = self._combine(lambda: _wedge(val, rhs, pos), pos)

    def atom(self):
        tok = self.tok
        if tok.kind == "int":
            self.i += 1
            return self.chart.scalar(int(tok.text))
        if tok.kind == "ident":
            self.i += 1
            name = tok.text
            if name in self.chart.coord_names:
                return self.chart.coord(name)
            if self.forms and name.startswith("d") and name[1:] in self.chart.coord_names:
                from .calculus import DifferentialForm

                return DifferentialForm.coordinate(self.chart, name[1:])
            raise UnknownCoordinate(f"unknown coordinate {name!r} at offset {tok.pos}")
        if self.eat("("):
            val = self.expr()
            if not self.eat(")"):
                raise ExpressionSyntaxError("expected ')'", self.tok.pos)
            return val
        if tok.kind == "end":
            raise ExpressionSyntaxError("unexpected end of input", tok.pos)
        raise ExpressionSyntaxError(f"unexpected {tok.text!r}", tok.pos)


def _mul(a, b):
    if isinstance(a, RationalScalar) or isinstance(b, RationalScalar):
        return a * b
    from .calculus import wedge

    return wedge(a, b)


def _wedge(a, b, pos):
    from .calculus import wedge

    if isinstance(b, RationalScalar):
        raise ExpressionSyntaxError("'^' after a form needs a form", pos)
    return wedge(a, b)


def parse_scalar(text: str, chart: Chart) -> RationalScalar:
    """Parse a polynomial (or rational) expression in the chart coordinates."""
    return _Parser(text, chart, forms=False).parse()


def parse_form(text: str, chart: Chart):
    """Parse a differential form such as ``x*dy - y*dx`` or ``w*dx^dy^dz``.

    A bare scalar expression is returned as a :class:`RationalScalar`.
    """
    return _Parser(text, chart, forms=True).parse()

"""Exact scalars: rational functions in the chart coordinates over QQ.

A :class:`RationalScalar` is a pair ``num/den`` of sparse polynomials from
sympy's low-level ring implementation, kept in canonical form:
``gcd(num, den) == 1``, ``den`` monic under graded-lex order, and zero stored
as ``0/1``.  Canonical form makes equality (and therefore zero testing)
structural.
"""

from __future__ import annotations

from fractions import Fraction
from functools import cached_property
from typing import Iterable, Sequence

from sympy.polys.domains import QQ
from sympy.polys.orderings import grlex
from sympy.polys.rings import PolyElement, ring

from .errors import ChartMismatch, DivisionByZero, IndexOutOfRange

__all__ = ["Chart", "RationalScalar", "scalar_arith", "derivative"]


class Chart:
    """A single coordinate chart ``(x^1, ..., x^n)``.

    Two charts are equal iff their coordinate names agree, and then they
    share the same polynomial ring.
    """

    def __init__(self, coord_names: Sequence[str]):
        names = tuple(str(c) for c in coord_names)
        if not names:
            raise ValueError("a chart needs at least one coordinate")
        if len(set(names)) != len(names):
            raise ValueError(f"duplicate coordinate names in {names}")
        for c in names:
            if not c.isidentifier():
                raise ValueError(f"invalid coordinate name {c!r}")
        self.coord_names = names
        self.dim = len(names)
        self.ring = ring(",".join(names), QQ, grlex)[0]

    def __repr__(self) -> str:
        return f"Chart({list(self.coord_names)!r})"

    def __eq__(self, other) -> bool:
        return isinstance(other, Chart) and other.coord_names == self.coord_names

    def __hash__(self) -> int:
        return hash(self.coord_names)

    @cached_property
    def zero(self) -> "RationalScalar":
        return RationalScalar._raw(self.ring.zero, self.ring.one)

    @cached_property
    def one(self) -> "RationalScalar":
        return RationalScalar._raw(self.ring.one, self.ring.one)

    def coord(self, i: int | str) -> "RationalScalar":
        """The coordinate function x^i (by index or name)."""
        if isinstance(i, str):
            i = self.index(i)
        self.check_index(i)
        return RationalScalar._raw(self.ring.gens[i], self.ring.one)

    @property
    def coords(self) -> tuple["RationalScalar", ...]:
        return tuple(self.coord(i) for i in range(self.dim))

    def index(self, name: str) -> int:
        from .errors import UnknownCoordinate

        try:
            return self.coord_names.index(name)
        except ValueError:
            raise UnknownCoordinate(f"unknown coordinate {name!r}") from None

    def check_index(self, i: int) -> None:
        if not 0 <= i < self.dim:
            raise IndexOutOfRange(f"coordinate index {i} outside 0..{self.dim - 1}")

    def scalar(self, value) -> "RationalScalar":
        """Coerce ints, Fractions, polynomial strings and scalars into this chart."""
        if isinstance(value, RationalScalar):
            if value.num.ring != self.ring:
                raise ChartMismatch("scalar belongs to a different chart")
            return value
        if isinstance(value, str):
            from .expr import parse_scalar

            return parse_scalar(value, self)
        if isinstance(value, PolyElement):
            return RationalScalar(value.set_ring(self.ring) if value.ring != self.ring else value)
        if isinstance(value, (int, Fraction)):
            q = QQ(value.numerator, value.denominator) if isinstance(value, Fraction) else QQ(value)
            return RationalScalar._raw(self.ring.ground_new(q), self.ring.one)
        if hasattr(value, "numerator") and hasattr(value, "denominator"):
            return self.scalar(Fraction(int(value.numerator), int(value.denominator)))
        raise TypeError(f"cannot convert {type(value).__name__} to a scalar")

    def scalars(self, values: Iterable) -> tuple["RationalScalar", ...]:
        return tuple(self.scalar(v) for v in values)


def _canonical(num: PolyElement, den: PolyElement) -> tuple[PolyElement, PolyElement]:
    if not num:
        return num.ring.zero, num.ring.one
    if not den:
        raise DivisionByZero("zero denominator")
    one = num.ring.one
    if den == one:
        return num, den
    if den.is_ground:
        return num.quo_ground(den.LC), one
    num, den = num.cancel(den)
    lc = den.LC
    if lc != 1:
        num = num.quo_ground(lc)
        den = den.quo_ground(lc)
    return num, den


class RationalScalar:
    """An element of QQ(x^1, ..., x^n) in canonical form.  Immutable."""

    __slots__ = ("num", "den", "_hash")

    def __init__(self, num: PolyElement, den: PolyElement | None = None):
        if den is None:
            den = num.ring.one
        elif den.ring != num.ring:
            raise ChartMismatch("numerator and denominator from different rings")
        self.num, self.den = _canonical(num, den)
        self._hash = None

    @classmethod
    def _raw(cls, num: PolyElement, den: PolyElement) -> "RationalScalar":
        obj = object.__new__(cls)
        obj.num = num
        obj.den = den
        obj._hash = None
        return obj

    @property
    def ring(self):
        return self.num.ring

    def _coerce(self, other) -> "RationalScalar":
        if isinstance(other, RationalScalar):
            if other.num.ring != self.num.ring:
                raise ChartMismatch("scalars from different charts")
            return other
        if isinstance(other, int):
            return RationalScalar._raw(self.num.ring.ground_new(other), self.num.ring.one)
        if isinstance(other, Fraction):
            q = QQ(other.numerator, other.denominator)
            return RationalScalar._raw(self.num.ring.ground_new(q), self.num.ring.one)
        return NotImplemented

    def is_polynomial(self) -> bool:
        return self.den == self.num.ring.one

    def is_constant(self) -> bool:
        return self.num.is_ground and self.den.is_ground

    def __bool__(self) -> bool:
        return bool(self.num)

    def is_zero(self) -> bool:
        return not self.num

    def __eq__(self, other) -> bool:
        o = self._coerce(other) if not isinstance(other, RationalScalar) else other
        if o is NotImplemented:
            return NotImplemented
        return self.num == o.num and self.den == o.den

    def __hash__(self) -> int:
        if self._hash is None:
            self._hash = hash((self.num, self.den))
        return self._hash

    def __neg__(self) -> "RationalScalar":
        return RationalScalar._raw(-self.num, self.den)

    def __pos__(self) -> "RationalScalar":
        return self

    def __add__(self, other) -> "RationalScalar":
        o = self._coerce(other)
        if o is NotImplemented:
            return o
        if not o.num:
            return self
        if not self.num:
            return o
        one = self.num.ring.one
        if self.den == one and o.den == one:
            return RationalScalar._raw(self.num + o.num, one)
        if self.den == o.den:
            return RationalScalar(self.num + o.num, self.den)
        return RationalScalar(self.num * o.den + o.num * self.den, self.den * o.den)

    __radd__ = __add__

    def __sub__(self, other) -> "RationalScalar":
        o = self._coerce(other)
        if o is NotImplemented:
            return o
        return self + (-o)

    def __rsub__(self, other) -> "RationalScalar":
        o = self._coerce(other)
        if o is NotImplemented:
            return o
        return o + (-self)

    def __mul__(self, other) -> "RationalScalar":
        o = self._coerce(other)
        if o is NotImplemented:
            return o
        if not self.num or not o.num:
            return RationalScalar._raw(self.num.ring.zero, self.num.ring.one)
        one = self.num.ring.one
        if self.den == one and o.den == one:
            return RationalScalar._raw(self.num * o.num, one)
        return RationalScalar(self.num * o.num, self.den * o.den)

    __rmul__ = __mul__

    def __truediv__(self, other) -> "RationalScalar":
        o = self._coerce(other)
        if o is NotImplemented:
            return o
        if not o.num:
            raise DivisionByZero("division by the zero scalar")
        if o.is_constant():
            c = o.num.LC / o.den.LC
            return RationalScalar._raw(self.num.quo_ground(c), self.den)
        return RationalScalar(self.num * o.den, self.den * o.num)

    def __rtruediv__(self, other) -> "RationalScalar":
        o = self._coerce(other)
        if o is NotImplemented:
            return o
        return o / self

    def __pow__(self, k: int) -> "RationalScalar":
        if not isinstance(k, int):
            raise TypeError("only integer powers are supported")
        if k < 0:
            return self.inverse() ** (-k)
        return RationalScalar._raw(self.num**k, self.den**k)

    def inverse(self) -> "RationalScalar":
        one = self.num.ring.one
        return RationalScalar._raw(one, one) / self

    def diff(self, i: int) -> "RationalScalar":
        """Exact partial derivative with respect to the i-th coordinate."""
        gens = self.num.ring.gens
        if not 0 <= i < len(gens):
            raise IndexOutOfRange(f"coordinate index {i} outside 0..{len(gens) - 1}")
        x = gens[i]
        dn = self.num.diff(x)
        one = self.num.ring.one
        if self.den == one:
            return RationalScalar._raw(dn, one)
        dd = self.den.diff(x)
        if not dd:
            return RationalScalar(dn, self.den)
        return RationalScalar(dn * self.den - self.num * dd, self.den**2)

    def evaluate(self, point: Sequence) -> Fraction:
        """Value at a rational point; raises DivisionByZero on a pole."""
        vals = [QQ(Fraction(v).numerator, Fraction(v).denominator) for v in point]
        if len(vals) != self.num.ring.ngens:
            raise ValueError("point dimension does not match the chart")
        d = self.den(*vals)
        if d == 0:
            raise DivisionByZero(f"denominator vanishes at {tuple(point)}")
        n = self.num(*vals)
        q = n / d
        return Fraction(int(q.numerator), int(q.denominator))

    def total_degree(self) -> int:
        return max(self.num.degree(), 0) if self.num else 0

    def __str__(self) -> str:
        n = _poly_str(self.num)
        if self.den == self.num.ring.one:
            return n
        d = _poly_str(self.den)
        if len(self.num.terms()) > 1:
            n = f"({n})"
        if len(self.den.terms()) > 1 or "*" in d:
            d = f"({d})"
        return f"{n}/{d}"

    def __repr__(self) -> str:
        return f"RationalScalar({self})"


def _poly_str(p: PolyElement) -> str:
    return str(p).replace("**", "^")


def scalar_arith(a: RationalScalar, b: RationalScalar, op: str) -> RationalScalar:
    """Field operation by name: ``add``, ``sub``, ``mul`` or ``div``."""
    if op == "add":
        return a + b
    if op == "sub":
        return a - b
    if op == "mul":
        return a * b
    if op == "div":
        return a / b
    raise ValueError(f"unknown operation {op!r}")


def derivative(a: RationalScalar, i: int) -> RationalScalar:
    return a.diff(i)

"""Exact dense matrices over a field.

Entries may be :class:`fractions.Fraction` (linear algebra of the Dirac
appendix) or :class:`~courant.scalars.RationalScalar` (bundle data over a
chart).  Nothing here evaluates numerically: pivots are chosen by exact
nonzero tests, so rank statements hold over the whole rational-function field
(i.e. at generic points).
"""

from __future__ import annotations

from fractions import Fraction
from typing import Callable, Iterable, Sequence

from .errors import ShapeMismatch, SingularMetric

__all__ = ["Matrix"]


class Matrix:
    """Immutable ``rows x cols`` matrix stored as a tuple of row tuples."""

    __slots__ = ("rows", "shape")

    def __init__(self, rows: Iterable[Iterable]):
        self.rows = tuple(tuple(r) for r in rows)
        ncols = len(self.rows[0]) if self.rows else 0
        if any(len(r) != ncols for r in self.rows):
            raise ShapeMismatch("ragged matrix rows")
        self.shape = (len(self.rows), ncols)

    # construction ------------------------------------------------------------
    @classmethod
    def zeros(cls, m: int, n: int, zero=0) -> "Matrix":
        return cls([[zero] * n for _ in range(m)])

    @classmethod
    def identity(cls, n: int, one=1, zero=None) -> "Matrix":
        if zero is None:
            zero = one - one
        return cls([[one if i == j else zero for j in range(n)] for i in range(n)])

    @classmethod
    def from_columns(cls, cols: Sequence[Sequence]) -> "Matrix":
        return cls(zip(*cols)) if cols else cls([])

    @classmethod
    def block_diag(cls, blocks: Sequence["Matrix"], zero) -> "Matrix":
        n = sum(b.shape[0] for b in blocks)
        m = sum(b.shape[1] for b in blocks)
        out = [[zero] * m for _ in range(n)]
        r0 = c0 = 0
        for b in blocks:
            for i, row in enumerate(b.rows):
                for j, v in enumerate(row):
                    out[r0 + i][c0 + j] = v
            r0 += b.shape[0]
            c0 += b.shape[1]
        return cls(out)

    def map(self, f: Callable) -> "Matrix":
        return Matrix([[f(v) for v in r] for r in self.rows])

    # access ------------------------------------------------------------------
    def __getitem__(self, ij):
        i, j = ij
        return self.rows[i][j]

    def row(self, i: int) -> tuple:
        return self.rows[i]

    def col(self, j: int) -> tuple:
        return tuple(r[j] for r in self.rows)

    @property
    def columns(self) -> list[tuple]:
        return [self.col(j) for j in range(self.shape[1])]

    @property
    def T(self) -> "Matrix":
        return Matrix(zip(*self.rows)) if self.rows and self.shape[1] else Matrix([[]] * self.shape[1])

    def submatrix(self, rows: Sequence[int], cols: Sequence[int]) -> "Matrix":
        return Matrix([[self.rows[i][j] for j in cols] for i in rows])

    def __eq__(self, other) -> bool:
        return isinstance(other, Matrix) and self.shape == other.shape and all(
            a == b for ra, rb in zip(self.rows, other.rows) for a, b in zip(ra, rb)
        )

    def __hash__(self) -> int:
        return hash(self.rows)

    def __repr__(self) -> str:
        body = "; ".join(", ".join(str(v) for v in r) for r in self.rows)
        return f"Matrix([{body}])"

    def is_zero(self) -> bool:
        return not any(v for r in self.rows for v in r)

    def is_square(self) -> bool:
        return self.shape[0] == self.shape[1]

    def is_symmetric(self) -> bool:
        return self.is_square() and self == self.T

    def is_skew(self) -> bool:
        return self.is_square() and self == -self.T

    # arithmetic ----------------------------------------------------------------
    def __add__(self, other: "Matrix") -> "Matrix":
        if self.shape != other.shape:
            raise ShapeMismatch(f"cannot add {self.shape} and {other.shape}")
        return Matrix([[a + b for a, b in zip(ra, rb)] for ra, rb in zip(self.rows, other.rows)])

    def __sub__(self, other: "Matrix") -> "Matrix":
        if self.shape != other.shape:
            raise ShapeMismatch(f"cannot subtract {self.shape} and {other.shape}")
        return Matrix([[a - b for a, b in zip(ra, rb)] for ra, rb in zip(self.rows, other.rows)])

    def __neg__(self) -> "Matrix":
        return Matrix([[-a for a in r] for r in self.rows])

    def scale(self, c) -> "Matrix":
        return Matrix([[c * a for a in r] for r in self.rows])

    def __mul__(self, c) -> "Matrix":
        return self.scale(c)

    __rmul__ = __mul__

    def __matmul__(self, other: "Matrix") -> "Matrix":
        if self.shape[1] != other.shape[0]:
            raise ShapeMismatch(f"cannot multiply {self.shape} by {other.shape}")
        cols = other.columns
        return Matrix([[_dot(r, c) for c in cols] for r in self.rows])

    def apply(self, v: Sequence) -> tuple:
        """Matrix times a column vector given as a sequence."""
        if len(v) != self.shape[1]:
            raise ShapeMismatch(f"vector of length {len(v)} for matrix {self.shape}")
        return tuple(_dot(r, v) for r in self.rows)

    def rapply(self, v: Sequence) -> tuple:
        """Row vector times matrix."""
        if len(v) != self.shape[0]:
            raise ShapeMismatch(f"vector of length {len(v)} for matrix {self.shape}")
        return tuple(_dot(v, c) for c in self.columns)

    def bilinear(self, u: Sequence, v: Sequence):
        """``u^T M v``."""
        return _dot(u, self.apply(v))

    # elimination ---------------------------------------------------------------
    def rref(self) -> tuple["Matrix", tuple[int, ...]]:
        """Reduced row-echelon form and pivot columns."""
        m = _field_rows(self)
        nrows, ncols = self.shape
        pivots = []
        pr = 0
        for pc in range(ncols):
            if pr == nrows:
                break
            sel = next((i for i in range(pr, nrows) if m[i][pc]), None)
            if sel is None:
                continue
            m[pr], m[sel] = m[sel], m[pr]
            p = m[pr][pc]
            m[pr] = [v / p for v in m[pr]]
            for i in range(nrows):
                if i != pr and m[i][pc]:
                    f = m[i][pc]
                    m[i] = [a - f * b for a, b in zip(m[i], m[pr])]
            pivots.append(pc)
            pr += 1
        return Matrix(m), tuple(pivots)

    def rank(self) -> int:
        return len(self.rref()[1])

    def nullspace(self) -> list[tuple]:
        """Basis of ``{v : M v = 0}``, one vector per free column."""
        r, pivots = self.rref()
        ncols = self.shape[1]
        zero, one = _zero_one(self)
        basis = []
        for free in (j for j in range(ncols) if j not in pivots):
            v = [zero] * ncols
            v[free] = one
            for i, pc in enumerate(pivots):
                v[pc] = -r[i, free]
            basis.append(tuple(v))
        return basis

    def solve(self, b: Sequence) -> tuple | None:
        """One solution of ``M x = b`` (free variables zero), or None."""
        aug = Matrix([list(r) + [bi] for r, bi in zip(self.rows, b)])
        r, pivots = aug.rref()
        ncols = self.shape[1]
        if ncols in pivots:
            return None
        zero, _ = _zero_one(self)
        x = [zero] * ncols
        for i, pc in enumerate(pivots):
            x[pc] = r[i, ncols]
        return tuple(x)

    def inverse(self) -> "Matrix":
        if not self.is_square():
            raise ShapeMismatch("only square matrices are invertible")
        n = self.shape[0]
        zero, one = _zero_one(self)
        aug = Matrix([list(r) + [one if i == j else zero for j in range(n)] for i, r in enumerate(self.rows)])
        r, pivots = aug.rref()
        if pivots[:n] != tuple(range(n)):
            raise SingularMetric("matrix is singular")
        return Matrix([row[n:] for row in r.rows])

    def det(self):
        if not self.is_square():
            raise ShapeMismatch("determinant of a non-square matrix")
        m = _field_rows(self)
        n = self.shape[0]
        zero, one = _zero_one(self)
        d = one
        for c in range(n):
            sel = next((i for i in range(c, n) if m[i][c]), None)
            if sel is None:
                return zero
            if sel != c:
                m[c], m[sel] = m[sel], m[c]
                d = -d
            p = m[c][c]
            d = d * p
            for i in range(c + 1, n):
                if m[i][c]:
                    f = m[i][c] / p
                    m[i] = [a - f * b for a, b in zip(m[i], m[c])]
        return d


def _dot(u: Sequence, v: Sequence):
    it = iter(zip(u, v))
    try:
        a, b = next(it)
    except StopIteration:
        return 0
    acc = a * b
    for a, b in it:
        if a and b:
            acc = acc + a * b
    return acc


def _zero_one(m: Matrix):
    for r in m.rows:
        for v in r:
            if not isinstance(v, int):
                return v - v, (v - v) + 1
    return Fraction(0), Fraction(1)


def _field_rows(m: Matrix) -> list[list]:
    # plain ints would divide to floats
    zero, _ = _zero_one(m)
    return [[zero + v if isinstance(v, int) else v for v in r] for r in m.rows]

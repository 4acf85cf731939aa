"""Cartan calculus on a coordinate chart.

Sign conventions (also listed in docs/conventions.md):

* forms use the determinant convention, ``(dx^dy)(d/dx, d/dy) = 1``;
* ``i(X)`` contracts the first slot, so ``i(Y) i(X) Phi = Phi(X, Y, .)``;
* a bivector ``P`` is stored as the skew matrix ``P^{ij} = P(dx^i, dx^j)`` and
  ``sharp_P`` is fixed by ``beta(sharp_P alpha) = P(alpha, beta)``;
* Christoffel matrices are indexed ``Gamma[i][k][j] = Gamma^k_{ij}``, i.e.
  ``nabla_{d_i} e = d_i e + Gamma[i] e``.
"""

from __future__ import annotations

from functools import cached_property
from itertools import combinations
from typing import Callable, Iterable, Mapping, Sequence

from .errors import (
    ChartMismatch,
    DegreeOverflow,
    DegreeUnderflow,
    InvalidParaHermitian,
    ShapeMismatch,
    SingularMetric,
)
from .linalg import Matrix
from .scalars import Chart, RationalScalar

__all__ = [
    "VectorField",
    "DifferentialForm",
    "Bivector",
    "MetricOnTM",
    "EndomorphismField",
    "lie_bracket",
    "exterior_derivative",
    "interior_product",
    "lie_derivative",
    "wedge",
    "musical",
    "flat",
    "sharp",
    "levi_civita",
    "covariant_derivative_tm",
    "nijenhuis",
    "is_poisson",
    "MAX_FORM_DEGREE",
]

MAX_FORM_DEGREE = 4


def _same_chart(a: Chart, b: Chart) -> None:
    if a != b:
        raise ChartMismatch(f"{a!r} vs {b!r}")


class VectorField:
    """Vector field ``X = X^i d/dx^i`` on a chart."""

    __slots__ = ("chart", "components")

    def __init__(self, chart: Chart, components: Iterable):
        comps = chart.scalars(components)
        if len(comps) != chart.dim:
            raise ShapeMismatch(f"vector field needs {chart.dim} components, got {len(comps)}")
        self.chart = chart
        self.components = comps

    @classmethod
    def zero(cls, chart: Chart) -> "VectorField":
        return cls(chart, [chart.zero] * chart.dim)

    @classmethod
    def coordinate(cls, chart: Chart, i: int | str) -> "VectorField":
        if isinstance(i, str):
            i = chart.index(i)
        chart.check_index(i)
        return cls(chart, [chart.one if j == i else chart.zero for j in range(chart.dim)])

    def __getitem__(self, i: int) -> RationalScalar:
        return self.components[i]

    def __iter__(self):
        return iter(self.components)

    def __call__(self, f: RationalScalar) -> RationalScalar:
        """Directional derivative ``X(f)``."""
        f = self.chart.scalar(f)
        acc = self.chart.zero
        for i, c in enumerate(self.components):
            if c:
                acc = acc + c * f.diff(i)
        return acc

    def __add__(self, other: "VectorField") -> "VectorField":
        _same_chart(self.chart, other.chart)
        return VectorField(self.chart, [a + b for a, b in zip(self.components, other.components)])

    def __sub__(self, other: "VectorField") -> "VectorField":
        _same_chart(self.chart, other.chart)
        return VectorField(self.chart, [a - b for a, b in zip(self.components, other.components)])

    def __neg__(self) -> "VectorField":
        return VectorField(self.chart, [-a for a in self.components])

    def __mul__(self, f) -> "VectorField":
        f = self.chart.scalar(f)
        return VectorField(self.chart, [f * a for a in self.components])

    __rmul__ = __mul__

    def __eq__(self, other) -> bool:
        return (
            isinstance(other, VectorField)
            and other.chart == self.chart
            and other.components == self.components
        )

    def __hash__(self) -> int:
        return hash(self.components)

    def is_zero(self) -> bool:
        return not any(self.components)

    def __str__(self) -> str:
        terms = [
            f"({c})*d/d{name}" for c, name in zip(self.components, self.chart.coord_names) if c
        ]
        return " + ".join(terms) if terms else "0"

    def __repr__(self) -> str:
        return f"VectorField({self})"


def _sort_sign(idx: Sequence[int]) -> tuple[int, tuple[int, ...]]:
    """Sign of the permutation sorting ``idx`` (0 if an index repeats)."""
    if len(set(idx)) != len(idx):
        return 0, ()
    inv = sum(1 for a in range(len(idx)) for b in range(a + 1, len(idx)) if idx[a] > idx[b])
    return (-1 if inv % 2 else 1), tuple(sorted(idx))


class DifferentialForm:
    """A k-form stored sparsely by strictly increasing multi-index."""

    __slots__ = ("chart", "degree", "_terms")

    def __init__(self, chart: Chart, degree: int, components: Mapping[Sequence[int], object] | None = None):
        if degree < 0:
            raise DegreeUnderflow("negative form degree")
        if degree > min(chart.dim, MAX_FORM_DEGREE):
            raise DegreeOverflow(
                f"degree {degree} exceeds the cap min(n, {MAX_FORM_DEGREE}) = {min(chart.dim, MAX_FORM_DEGREE)}"
            )
        terms: dict[tuple[int, ...], RationalScalar] = {}
        for idx, val in (components or {}).items():
            idx = tuple(idx)
            if len(idx) != degree:
                raise ShapeMismatch(f"index {idx} does not have length {degree}")
            for i in idx:
                chart.check_index(i)
            sign, key = _sort_sign(idx)
            if not sign:
                continue
            v = chart.scalar(val)
            v = v if sign > 0 else -v
            terms[key] = terms[key] + v if key in terms else v
        self.chart = chart
        self.degree = degree
        self._terms = {k: v for k, v in terms.items() if v}

    @classmethod
    def _make(cls, chart: Chart, degree: int, terms: dict) -> "DifferentialForm":
        obj = object.__new__(cls)
        obj.chart = chart
        obj.degree = degree
        obj._terms = {k: v for k, v in terms.items() if v}
        return obj

    @classmethod
    def zero(cls, chart: Chart, degree: int) -> "DifferentialForm":
        return cls(chart, degree)

    @classmethod
    def coordinate(cls, chart: Chart, *idx: int | str) -> "DifferentialForm":
        """``dx^{i1} ^ ... ^ dx^{ik}``."""
        ids = [chart.index(i) if isinstance(i, str) else i for i in idx]
        return cls(chart, len(ids), {tuple(ids): 1})

    @classmethod
    def from_dense(cls, chart: Chart, comps: Sequence) -> "DifferentialForm":
        """1-form from its n components ``alpha_i``."""
        return cls(chart, 1, {(i,): c for i, c in enumerate(comps)})

    def component(self, idx: Sequence[int]) -> RationalScalar:
        sign, key = _sort_sign(tuple(idx))
        if not sign or key not in self._terms:
            return self.chart.zero
        v = self._terms[key]
        return v if sign > 0 else -v

    def items(self):
        return sorted(self._terms.items())

    @property
    def dense(self) -> tuple[RationalScalar, ...]:
        """Components of a 1-form as an n-tuple."""
        if self.degree != 1:
            raise ShapeMismatch("dense components only for 1-forms")
        return tuple(self._terms.get((i,), self.chart.zero) for i in range(self.chart.dim))

    def __call__(self, *vectors: VectorField) -> RationalScalar:
        """Evaluate on ``degree`` vector fields."""
        if len(vectors) != self.degree:
            raise ShapeMismatch(f"{self.degree}-form evaluated on {len(vectors)} vectors")
        acc = self.chart.zero
        for idx, c in self._terms.items():
            m = Matrix([[v[i] for i in idx] for v in vectors])
            acc = acc + c * m.det() if self.degree else acc + c
        return acc

    def _binop(self, other: "DifferentialForm", sign: int) -> "DifferentialForm":
        _same_chart(self.chart, other.chart)
        if other.degree != self.degree:
            raise ShapeMismatch(f"cannot add forms of degree {self.degree} and {other.degree}")
        terms = dict(self._terms)
        for k, v in other._terms.items():
            v = v if sign > 0 else -v
            terms[k] = terms[k] + v if k in terms else v
        return DifferentialForm._make(self.chart, self.degree, terms)

    def __add__(self, other: "DifferentialForm") -> "DifferentialForm":
        return self._binop(other, 1)

    def __sub__(self, other: "DifferentialForm") -> "DifferentialForm":
        return self._binop(other, -1)

    def __neg__(self) -> "DifferentialForm":
        return DifferentialForm._make(self.chart, self.degree, {k: -v for k, v in self._terms.items()})

    def __mul__(self, f) -> "DifferentialForm":
        f = self.chart.scalar(f)
        return DifferentialForm._make(self.chart, self.degree, {k: f * v for k, v in self._terms.items()})

    __rmul__ = __mul__

    def __eq__(self, other) -> bool:
        return (
            isinstance(other, DifferentialForm)
            and other.chart == self.chart
            and other.degree == self.degree
            and other._terms == self._terms
        )

    def __hash__(self) -> int:
        return hash((self.degree, tuple(sorted(self._terms.items()))))

    def is_zero(self) -> bool:
        return not self._terms

    def __str__(self) -> str:
        if not self._terms:
            return "0"
        names = self.chart.coord_names
        return " + ".join(
            f"({v})*" + "^".join("d" + names[i] for i in k) if k else f"({v})" for k, v in self.items()
        )

    def __repr__(self) -> str:
        return f"DifferentialForm[{self.degree}]({self})"


Form = RationalScalar | DifferentialForm


def _as_form(chart: Chart, w) -> DifferentialForm:
    if isinstance(w, DifferentialForm):
        return w
    w = chart.scalar(w)
    return DifferentialForm._make(chart, 0, {(): w})


def _as_result(w: DifferentialForm) -> Form:
    """Degree-0 forms are handed back as plain scalars."""
    if w.degree == 0:
        return w._terms.get((), w.chart.zero)
    return w


def _chart_of(w) -> Chart:
    if isinstance(w, (DifferentialForm, VectorField)):
        return w.chart
    raise TypeError("cannot infer the chart of a bare scalar; pass a form")


# ---------------------------------------------------------------------------
# operations


def lie_bracket(X: VectorField, Y: VectorField) -> VectorField:
    """``[X, Y]^i = X(Y^i) - Y(X^i)``."""
    _same_chart(X.chart, Y.chart)
    return VectorField(X.chart, [X(b) - Y(a) for a, b in zip(X.components, Y.components)])


def _d(w: DifferentialForm) -> DifferentialForm:
    # uncapped; callers enforce the degree policy
    n = w.chart.dim
    terms: dict[tuple[int, ...], RationalScalar] = {}
    for idx, c in w._terms.items():
        for i in range(n):
            if i in idx:
                continue
            dc = c.diff(i)
            if not dc:
                continue
            pos = sum(1 for j in idx if j < i)
            key = tuple(sorted(idx + (i,)))
            v = dc if pos % 2 == 0 else -dc
            terms[key] = terms[key] + v if key in terms else v
    return DifferentialForm._make(w.chart, w.degree + 1, terms)


def exterior_derivative(w: Form, chart: Chart | None = None) -> DifferentialForm:
    """``d w``.  A bare scalar needs its chart only when it cannot be inferred."""
    if not isinstance(w, DifferentialForm):
        chart = chart or _scalar_chart(w)
        w = _as_form(chart, w)
    top = min(w.chart.dim, MAX_FORM_DEGREE)
    if w.degree >= top:
        raise DegreeOverflow(f"d of a {w.degree}-form would exceed degree {top}")
    return _d(w)


def is_closed(w: DifferentialForm) -> bool:
    """``d w == 0``; top-degree forms are closed."""
    if w.degree >= w.chart.dim:
        return True
    return _d(w).is_zero()


def _scalar_chart(f: RationalScalar) -> Chart:
    return Chart([str(g) for g in f.ring.gens])


def interior_product(X: VectorField, w: DifferentialForm) -> Form:
    """``i(X) w``, contracting the first slot."""
    if not isinstance(w, DifferentialForm) or w.degree == 0:
        raise DegreeUnderflow("interior product needs a form of degree >= 1")
    _same_chart(X.chart, w.chart)
    terms: dict[tuple[int, ...], RationalScalar] = {}
    for idx, c in w._terms.items():
        for p, i in enumerate(idx):
            xi = X.components[i]
            if not xi:
                continue
            key = idx[:p] + idx[p + 1 :]
            v = xi * c if p % 2 == 0 else -(xi * c)
            terms[key] = terms[key] + v if key in terms else v
    return _as_result(DifferentialForm._make(w.chart, w.degree - 1, terms))


def lie_derivative(X: VectorField, w: Form) -> Form:
    """``L_X w = i(X) d w + d i(X) w``; on functions ``L_X f = X(f)``."""
    if not isinstance(w, DifferentialForm):
        return X(w)
    _same_chart(X.chart, w.chart)
    if w.degree == 0:
        return X(_as_result(w))
    first = _interior_raw(X, _d(w)) if w.degree < w.chart.dim else None
    second = _d(_as_form(w.chart, interior_product(X, w)))
    out = second if first is None else first + second
    return _as_result(out)


def _interior_raw(X: VectorField, w: DifferentialForm) -> DifferentialForm:
    res = interior_product(X, w)
    return _as_form(X.chart, res)


def wedge(a: Form, b: Form) -> Form:
    """Graded-commutative exterior product; scalars act as 0-forms."""
    if not isinstance(a, DifferentialForm) and not isinstance(b, DifferentialForm):
        return a * b
    chart = a.chart if isinstance(a, DifferentialForm) else b.chart
    a = _as_form(chart, a)
    b = _as_form(chart, b)
    _same_chart(a.chart, b.chart)
    deg = a.degree + b.degree
    if deg > min(chart.dim, MAX_FORM_DEGREE):
        raise DegreeOverflow(f"wedge product of degree {deg} exceeds the cap")
    terms: dict[tuple[int, ...], RationalScalar] = {}
    for ia, ca in a._terms.items():
        for ib, cb in b._terms.items():
            sign, key = _sort_sign(ia + ib)
            if not sign:
                continue
            v = ca * cb if sign > 0 else -(ca * cb)
            terms[key] = terms[key] + v if key in terms else v
    return _as_result(DifferentialForm._make(chart, deg, terms))


# ---------------------------------------------------------------------------
# tensors on TM


class _ChartMatrix:
    __slots__ = ("chart", "matrix", "__dict__")

    def __init__(self, chart: Chart, matrix):
        if not isinstance(matrix, Matrix):
            matrix = Matrix([[chart.scalar(v) for v in row] for row in matrix])
        else:
            matrix = matrix.map(chart.scalar)
        if matrix.shape != (chart.dim, chart.dim):
            raise ShapeMismatch(f"expected a {chart.dim}x{chart.dim} matrix, got {matrix.shape}")
        self.chart = chart
        self.matrix = matrix

    def __getitem__(self, ij) -> RationalScalar:
        return self.matrix[ij]

    def __eq__(self, other) -> bool:
        return type(other) is type(self) and other.chart == self.chart and other.matrix == self.matrix

    def __hash__(self) -> int:
        return hash(self.matrix)

    def __repr__(self) -> str:
        return f"{type(self).__name__}({self.matrix!r})"


class Bivector(_ChartMatrix):
    """Skew 2-vector ``P`` with ``P^{ij} = P(dx^i, dx^j)``."""

    def __init__(self, chart: Chart, matrix):
        super().__init__(chart, matrix)
        if not self.matrix.is_skew():
            raise ShapeMismatch("bivector matrix is not skew-symmetric")

    @classmethod
    def from_terms(cls, chart: Chart, terms: Mapping[tuple[int, int], object]) -> "Bivector":
        """Build ``sum c * d_i ^ d_j`` from ``{(i, j): c}``."""
        m = [[chart.zero] * chart.dim for _ in range(chart.dim)]
        for (i, j), c in terms.items():
            c = chart.scalar(c)
            m[i][j] = m[i][j] + c
            m[j][i] = m[j][i] - c
        return cls(chart, m)

    def __call__(self, alpha: DifferentialForm, beta: DifferentialForm) -> RationalScalar:
        return self.matrix.bilinear(alpha.dense, beta.dense)

    def sharp(self, alpha: DifferentialForm) -> VectorField:
        # (sharp alpha)^j = P^{ij} alpha_i
        return VectorField(self.chart, self.matrix.rapply(alpha.dense))

    def hamiltonian(self, f: RationalScalar) -> VectorField:
        """``X_f = sharp_P(df)``."""
        return self.sharp(exterior_derivative(self.chart.scalar(f), self.chart))

    def bracket(self, f: RationalScalar, h: RationalScalar) -> RationalScalar:
        """Poisson bracket ``{f, h} = P(df, dh)``."""
        return self(exterior_derivative(self.chart.scalar(f), self.chart), exterior_derivative(self.chart.scalar(h), self.chart))


class MetricOnTM(_ChartMatrix):
    """Symmetric nondegenerate ``g_{ij}``."""

    def __init__(self, chart: Chart, matrix):
        super().__init__(chart, matrix)
        if not self.matrix.is_symmetric():
            raise ShapeMismatch("metric matrix is not symmetric")
        if not self.matrix.det():
            raise SingularMetric("metric has zero determinant")

    @cached_property
    def inverse(self) -> Matrix:
        return self.matrix.inverse()

    def __call__(self, X: VectorField, Y: VectorField) -> RationalScalar:
        return self.matrix.bilinear(X.components, Y.components)


class EndomorphismField(_ChartMatrix):
    """(1,1)-tensor acting on vector fields by matrix multiplication."""

    def __call__(self, X: VectorField) -> VectorField:
        return VectorField(self.chart, self.matrix.apply(X.components))

    def __matmul__(self, other: "EndomorphismField") -> "EndomorphismField":
        return EndomorphismField(self.chart, self.matrix @ other.matrix)


def flat(g: MetricOnTM, X: VectorField) -> DifferentialForm:
    return DifferentialForm.from_dense(g.chart, g.matrix.apply(X.components))


def sharp(g: MetricOnTM, alpha: DifferentialForm) -> VectorField:
    return VectorField(g.chart, g.inverse.apply(alpha.dense))


def musical(g_or_P: MetricOnTM | Bivector, arg: VectorField | DifferentialForm):
    """Musical maps: ``flat_g`` on vectors, ``sharp_g`` or ``sharp_P`` on 1-forms."""
    if isinstance(g_or_P, Bivector):
        if not isinstance(arg, DifferentialForm) or arg.degree != 1:
            raise ShapeMismatch("sharp_P acts on 1-forms")
        return g_or_P.sharp(arg)
    if isinstance(arg, VectorField):
        return flat(g_or_P, arg)
    if isinstance(arg, DifferentialForm) and arg.degree == 1:
        return sharp(g_or_P, arg)
    raise ShapeMismatch("musical maps act on vector fields or 1-forms")


def levi_civita(g: MetricOnTM) -> tuple[Matrix, ...]:
    """Christoffel matrices of the Levi-Civita connection of ``g``."""
    chart = g.chart
    n = chart.dim
    ginv = g.inverse
    dg = [g.matrix.map(lambda v, i=i: v.diff(i)) for i in range(n)]
    out = []
    for i in range(n):
        rows = []
        for k in range(n):
            row = []
            for j in range(n):
                acc = chart.zero
                for l in range(n):
                    if ginv[k, l]:
                        acc = acc + ginv[k, l] * (dg[i][l, j] + dg[j][l, i] - dg[l][i, j])
                row.append(acc / 2)
            rows.append(row)
        out.append(Matrix(rows))
    return tuple(out)


def covariant_derivative_tm(christoffel: Sequence[Matrix], X: VectorField, Y: VectorField) -> VectorField:
    """``nabla_X Y`` for a linear connection on TM given by Christoffel matrices."""
    chart = X.chart
    out = [chart.zero] * chart.dim
    for i, xi in enumerate(X.components):
        if not xi:
            continue
        gy = christoffel[i].apply(Y.components)
        for k in range(chart.dim):
            out[k] = out[k] + xi * (Y.components[k].diff(i) + gy[k])
    return VectorField(chart, out)


def nijenhuis(F: EndomorphismField) -> Callable[[VectorField, VectorField], VectorField]:
    """``N_F(X, Y) = [FX,FY] - F[FX,Y] - F[X,FY] + F^2[X,Y]`` as a bilinear map."""

    def N(X: VectorField, Y: VectorField) -> VectorField:
        FX, FY = F(X), F(Y)
        return lie_bracket(FX, FY) - F(lie_bracket(FX, Y)) - F(lie_bracket(X, FY)) + F(F(lie_bracket(X, Y)))

    return N


def nijenhuis_vanishes(F: EndomorphismField) -> bool:
    """Tensorial check on coordinate fields."""
    N = nijenhuis(F)
    chart = F.chart
    basis = [VectorField.coordinate(chart, i) for i in range(chart.dim)]
    return all(N(basis[i], basis[j]).is_zero() for i, j in combinations(range(chart.dim), 2))


def is_poisson(P: Bivector) -> tuple[bool, dict[tuple[int, int, int], RationalScalar]]:
    """Jacobi identity ``sum_cycl P^{is} d_s P^{jk} = 0`` for all ``i < j < k``.

    Returns the verdict and the nonzero residual components.
    """
    n = P.chart.dim
    m = P.matrix
    residual = {}
    for i, j, k in combinations(range(n), 3):
        acc = P.chart.zero
        for a, b, c in ((i, j, k), (j, k, i), (k, i, j)):
            for s in range(n):
                if m[a, s]:
                    acc = acc + m[a, s] * m[b, c].diff(s)
        if acc:
            residual[(i, j, k)] = acc
    return not residual, residual


def check_para_hermitian(g: MetricOnTM, F: EndomorphismField) -> None:
    """Raise :class:`InvalidParaHermitian` unless ``F^2 = I``, ``F^T g F = -g``, ``N_F = 0``."""
    chart = g.chart
    ident = Matrix.identity(chart.dim, chart.one)
    if F.matrix @ F.matrix != ident:
        raise InvalidParaHermitian("F^2 != I")
    if F.matrix.T @ g.matrix @ F.matrix != -g.matrix:
        raise InvalidParaHermitian("g(FX, FY) != -g(X, Y)")
    if not nijenhuis_vanishes(F):
        raise InvalidParaHermitian("Nijenhuis tensor of F does not vanish")

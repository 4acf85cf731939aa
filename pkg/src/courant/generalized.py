"""Concrete brackets on ``TM + T*M`` and on ``TM``.

Sections of ``TM + T*M`` are :class:`GeneralizedSection` pairs ``X + alpha``.
As bundle data the frame is ``(d/dx^1..d/dx^n, dx^1..dx^n)``, the metric is
``1/2 [[0, I], [I, 0]]`` and the standard anchor is ``[I | 0]``.

Conventions that fix signs (see docs/conventions.md):

* the twist adds ``i(Y) i(X) Phi = Phi(X, Y, .)`` to the form part;
* ``sharp_P`` satisfies ``beta(sharp_P alpha) = P(alpha, beta)``;
* on ``T*M`` with the Poisson structure, ``d_* f = -sharp_P(df)``, so that
  ``partial f = (-X_f) + df`` with ``X_f = sharp_P(df)``.
"""

from __future__ import annotations

from functools import cached_property
from typing import Callable

from .calculus import (
    Bivector,
    DifferentialForm,
    EndomorphismField,
    MetricOnTM,
    VectorField,
    check_para_hermitian,
    covariant_derivative_tm,
    exterior_derivative,
    interior_product,
    is_poisson,
    levi_civita,
    lie_bracket,
    lie_derivative,
    nijenhuis,
)
from .core import CourantStructure, ESection
from .errors import BetaTorsionMismatch, ChartMismatch, NotPoisson, ShapeMismatch
from .linalg import Matrix
from .scalars import Chart, RationalScalar

__all__ = [
    "GeneralizedSection",
    "TwistForm",
    "PoissonAnchorStructure",
    "ParaHermitianTM",
    "pairing",
    "partial_of",
    "courant_bracket",
    "dorfman_product",
    "koszul_bracket",
    "bialgebroid_bracket",
    "standard_structure",
    "poisson_structure",
    "paraherm_bracket",
    "paraherm_structure",
    "phi_torsion",
    "phi_torsion_alt",
    "torsion_nijenhuis_residual",
    "phi_gamma",
    "phi_bracket",
    "phi_structure",
    "riemannian_triple",
    "twist_lambda",
]


class GeneralizedSection:
    """``X + alpha`` with ``X`` a vector field and ``alpha`` a 1-form."""

    __slots__ = ("vf", "form")

    def __init__(self, vf: VectorField, form: DifferentialForm):
        if vf.chart != form.chart:
            raise ChartMismatch("vector and form parts live on different charts")
        if form.degree != 1:
            raise ShapeMismatch("form part must be a 1-form")
        self.vf = vf
        self.form = form

    @property
    def chart(self) -> Chart:
        return self.vf.chart

    @classmethod
    def of(cls, chart: Chart, vf=None, form=None) -> "GeneralizedSection":
        v = vf if isinstance(vf, VectorField) else VectorField(chart, vf if vf is not None else [0] * chart.dim)
        if isinstance(form, DifferentialForm):
            f = form
        else:
            f = DifferentialForm.from_dense(chart, form if form is not None else [0] * chart.dim)
        return cls(v, f)

    def to_esection(self) -> ESection:
        return ESection(self.chart, self.vf.components + self.form.dense)

    @classmethod
    def from_esection(cls, chart: Chart, e: ESection) -> "GeneralizedSection":
        n = chart.dim
        if e.rank != 2 * n:
            raise ShapeMismatch(f"expected a rank-{2 * n} section")
        return cls(VectorField(chart, e.components[:n]), DifferentialForm.from_dense(chart, e.components[n:]))

    def __add__(self, other: "GeneralizedSection") -> "GeneralizedSection":
        return GeneralizedSection(self.vf + other.vf, self.form + other.form)

    def __sub__(self, other: "GeneralizedSection") -> "GeneralizedSection":
        return GeneralizedSection(self.vf - other.vf, self.form - other.form)

    def __neg__(self) -> "GeneralizedSection":
        return GeneralizedSection(-self.vf, -self.form)

    def __mul__(self, f) -> "GeneralizedSection":
        return GeneralizedSection(self.vf * f, self.form * f)

    __rmul__ = __mul__

    def __eq__(self, other) -> bool:
        return isinstance(other, GeneralizedSection) and self.vf == other.vf and self.form == other.form

    def __hash__(self) -> int:
        return hash((self.vf, self.form))

    def is_zero(self) -> bool:
        return self.vf.is_zero() and self.form.is_zero()

    def __str__(self) -> str:
        return f"{self.vf} (+) {self.form}"

    def __repr__(self) -> str:
        return f"GeneralizedSection({self})"


class TwistForm:
    """A 3-form used to twist the Courant bracket."""

    __slots__ = ("phi",)

    def __init__(self, phi: DifferentialForm):
        if not isinstance(phi, DifferentialForm) or phi.degree != 3:
            raise ShapeMismatch("a twist must be a 3-form")
        self.phi = phi

    def term(self, X: VectorField, Y: VectorField) -> DifferentialForm:
        """``i(Y) i(X) Phi``."""
        return _as_one_form(X.chart, interior_product(Y, interior_product(X, self.phi)))

    def is_closed(self) -> bool:
        from .calculus import is_closed

        return is_closed(self.phi)


def _twist(twist) -> TwistForm | None:
    if twist is None or isinstance(twist, TwistForm):
        return twist
    return TwistForm(twist)


def _as_one_form(chart: Chart, w) -> DifferentialForm:
    if isinstance(w, DifferentialForm):
        return w
    return DifferentialForm(chart, 1)


def _d(chart: Chart, f: RationalScalar) -> DifferentialForm:
    return exterior_derivative(chart.scalar(f), chart)


def pairing(e1: GeneralizedSection, e2: GeneralizedSection, which: str = "g") -> RationalScalar:
    """``g = 1/2 (i_X beta + i_Y alpha)`` or ``omega = 1/2 (i_X beta - i_Y alpha)``."""
    if e1.chart != e2.chart:
        raise ChartMismatch("sections over different charts")
    a = interior_product(e1.vf, e2.form)
    b = interior_product(e2.vf, e1.form)
    if which == "g":
        return (a + b) / 2
    if which in ("omega", "ω", "w"):
        return (a - b) / 2
    raise ValueError(f"unknown pairing {which!r}")


def partial_of(f, chart: Chart | None = None) -> GeneralizedSection:
    """``0 + df`` for the standard anchor."""
    chart = chart or _chart_of_scalar(f)
    return GeneralizedSection(VectorField.zero(chart), _d(chart, f))


def _chart_of_scalar(f) -> Chart:
    if isinstance(f, RationalScalar):
        return Chart([str(g) for g in f.ring.gens])
    raise TypeError("pass the chart explicitly for non-scalar input")


def courant_bracket(e1: GeneralizedSection, e2: GeneralizedSection, twist=None) -> GeneralizedSection:
    """``[X,Y] + (L_X beta - L_Y alpha - d omega(e1, e2))`` plus the twist term."""
    chart = e1.chart
    X, a, Y, b = e1.vf, e1.form, e2.vf, e2.form
    form = lie_derivative(X, b) - lie_derivative(Y, a) - _d(chart, pairing(e1, e2, "omega"))
    tw = _twist(twist)
    if tw is not None:
        form = form + tw.term(X, Y)
    return GeneralizedSection(lie_bracket(X, Y), form)


def dorfman_product(e1: GeneralizedSection, e2: GeneralizedSection, twist=None) -> GeneralizedSection:
    """``[X,Y] + (L_X beta - i(Y) d alpha)`` plus the twist term."""
    chart = e1.chart
    X, a, Y, b = e1.vf, e1.form, e2.vf, e2.form
    form = lie_derivative(X, b)
    if chart.dim >= 2:  # on a line every 2-form vanishes
        form = form - _as_one_form(chart, interior_product(Y, exterior_derivative(a)))
    tw = _twist(twist)
    if tw is not None:
        form = form + tw.term(X, Y)
    return GeneralizedSection(lie_bracket(X, Y), form)


# ---------------------------------------------------------------------------
# Poisson data


class PoissonAnchorStructure:
    """A Poisson bivector; construction checks the Jacobi identity."""

    __slots__ = ("P",)

    def __init__(self, P: Bivector):
        ok, residual = is_poisson(P)
        if not ok:
            (i, j, k), v = next(iter(sorted(residual.items())))
            raise NotPoisson(f"Jacobi residual at ({i},{j},{k}) is {v}")
        self.P = P

    @property
    def chart(self) -> Chart:
        return self.P.chart

    def sharp(self, alpha: DifferentialForm) -> VectorField:
        return self.P.sharp(alpha)


def _poisson(P) -> PoissonAnchorStructure:
    if isinstance(P, PoissonAnchorStructure):
        return P
    return PoissonAnchorStructure(P)


def koszul_bracket(alpha: DifferentialForm, beta: DifferentialForm, P) -> DifferentialForm:
    """``[alpha, beta]_P = L_{#a} beta - L_{#b} alpha - d P(alpha, beta)``."""
    P = _poisson(P)
    return _koszul(P.P, alpha, beta)


def _koszul(P: Bivector, alpha: DifferentialForm, beta: DifferentialForm) -> DifferentialForm:
    chart = P.chart
    out = lie_derivative(P.sharp(alpha), beta) - lie_derivative(P.sharp(beta), alpha) - _d(chart, P(alpha, beta))
    return _as_one_form(chart, out)


def _dual_lie_derivative(P: Bivector, alpha: DifferentialForm, b: VectorField) -> VectorField:
    # (L*_alpha b)^j = (#alpha)(b^j) - <[alpha, dx^j]_P, b>
    chart = P.chart
    sa = P.sharp(alpha)
    comps = []
    for j in range(chart.dim):
        br = _koszul(P, alpha, DifferentialForm.coordinate(chart, j))
        comps.append(sa(b[j]) - interior_product(b, br))
    return VectorField(chart, comps)


def _contract_dstar(P: Bivector, bstar: DifferentialForm, a: VectorField) -> VectorField:
    # i(b*) d_* a, with (d_* a)(alpha, beta) = (#alpha)<beta,a> - (#beta)<alpha,a> - <[alpha,beta]_P, a>
    chart = P.chart
    sb = P.sharp(bstar)
    pair = interior_product(a, bstar)
    comps = []
    for j in range(chart.dim):
        dxj = DifferentialForm.coordinate(chart, j)
        term = sb(a[j]) - P.sharp(dxj)(pair) - interior_product(a, _koszul(P, bstar, dxj))
        comps.append(term)
    return VectorField(chart, comps)


def _dstar(P: Bivector, f: RationalScalar) -> VectorField:
    return -P.sharp(_d(P.chart, f))


def bialgebroid_bracket(e1: GeneralizedSection, e2: GeneralizedSection, P, flavor: str = "skew") -> GeneralizedSection:
    """Bracket (``skew``) or product (``product``) of the pair ``(TM, T*M_P)``."""
    P = _poisson(P).P
    chart = e1.chart
    a, astar, b, bstar = e1.vf, e1.form, e2.vf, e2.form
    if flavor == "product":
        vec = lie_bracket(a, b) + _dual_lie_derivative(P, astar, b) - _contract_dstar(P, bstar, a)
        form = _koszul(P, astar, bstar) + _as_one_form(chart, lie_derivative(a, bstar))
        if chart.dim >= 2:
            form = form - _as_one_form(chart, interior_product(b, exterior_derivative(astar)))
        return GeneralizedSection(vec, form)
    if flavor == "skew":
        w = pairing(e1, e2, "omega")
        vec = lie_bracket(a, b) + _dual_lie_derivative(P, astar, b) - _dual_lie_derivative(P, bstar, a) + _dstar(P, w)
        form = (
            _koszul(P, astar, bstar)
            + _as_one_form(chart, lie_derivative(a, bstar))
            - _as_one_form(chart, lie_derivative(b, astar))
            - _d(chart, w)
        )
        return GeneralizedSection(vec, form)
    raise ValueError(f"unknown flavor {flavor!r}")


# ---------------------------------------------------------------------------
# as bundle data


def _standard_metric(chart: Chart) -> Matrix:
    n = chart.dim
    h = chart.one / 2
    z = chart.zero
    return Matrix([[h if abs(i - j) == n else z for j in range(2 * n)] for i in range(2 * n)])


def _labels(chart: Chart) -> list[str]:
    return [f"d/d{c}" for c in chart.coord_names] + [f"d{c}" for c in chart.coord_names]


def _lift(chart: Chart, op: Callable) -> Callable[[ESection, ESection], ESection]:
    def rule(e1: ESection, e2: ESection) -> ESection:
        g1 = GeneralizedSection.from_esection(chart, e1)
        g2 = GeneralizedSection.from_esection(chart, e2)
        return op(g1, g2).to_esection()

    return rule


def standard_structure(chart: Chart, flavor: str = "skew", twist=None) -> CourantStructure:
    """``TM + T*M`` with the Courant bracket (skew) or the Dorfman product."""
    n = chart.dim
    tw = _twist(twist)
    rho = Matrix([[chart.one if j == i else chart.zero for j in range(2 * n)] for i in range(n)])
    if flavor == "skew":
        op = lambda a, b: courant_bracket(a, b, tw)
        name = "courant" if tw is None else "sw"
    elif flavor == "product":
        op = lambda a, b: dorfman_product(a, b, tw)
        name = "dorfman" if tw is None else "sw-product"
    else:
        raise ValueError(f"unknown flavor {flavor!r}")
    return CourantStructure(chart, _standard_metric(chart), rho, _lift(chart, op), flavor, _labels(chart), name)


def poisson_anchor_matrix(P: Bivector) -> Matrix:
    """``rho(X + alpha) = X + sharp_P alpha`` as an ``n x 2n`` matrix."""
    n = P.chart.dim
    rows = []
    for j in range(n):
        rows.append([P.chart.one if k == j else P.chart.zero for k in range(n)] + [P.matrix[i, j] for i in range(n)])
    return Matrix(rows)


def poisson_structure(P, flavor: str = "skew") -> CourantStructure:
    """``TM + T*M`` with anchor ``Id + sharp_P`` and the bialgebroid bracket."""
    PA = _poisson(P)
    chart = PA.chart
    op = lambda a, b: bialgebroid_bracket(a, b, PA, flavor)
    return CourantStructure(
        chart, _standard_metric(chart), poisson_anchor_matrix(PA.P), _lift(chart, op), flavor, _labels(chart),
        "poisson" if flavor == "skew" else "poisson-product",
    )


def twist_lambda(S: CourantStructure, twist, scale=None):
    """Three-form on ``TM + T*M`` equal to ``scale * Phi`` on the ``TM`` block.

    With the twist convention ``i(Y) i(X) Phi`` the default ``scale = 1/2``
    reproduces the twisted bracket through :func:`courant.core.modify_with_lambda`.
    """
    from .core import EThreeForm

    tw = _twist(twist)
    chart = S.chart
    s = chart.one / 2 if scale is None else chart.scalar(scale)
    return EThreeForm(S, {idx: s * v for idx, v in tw.phi.items()})


# ---------------------------------------------------------------------------
# para-Hermitian tangent bundle


class ParaHermitianTM:
    """Neutral metric ``g`` and involution ``F`` with ``g(FX,FY) = -g(X,Y)``, ``N_F = 0``."""

    def __init__(self, g: MetricOnTM, F: EndomorphismField):
        if g.chart != F.chart:
            raise ChartMismatch("g and F on different charts")
        check_para_hermitian(g, F)
        self.g = g
        self.F = F
        self.chart = g.chart

    @cached_property
    def F_plus(self) -> EndomorphismField:
        n = self.chart.dim
        I = Matrix.identity(n, self.chart.one)
        return EndomorphismField(self.chart, (I + self.F.matrix).scale(self.chart.one / 2))

    @cached_property
    def F_minus(self) -> EndomorphismField:
        n = self.chart.dim
        I = Matrix.identity(n, self.chart.one)
        return EndomorphismField(self.chart, (I - self.F.matrix).scale(self.chart.one / 2))

    def omega(self, X: VectorField, Y: VectorField) -> RationalScalar:
        """``omega(X, Y) = g(FX, Y)``."""
        return self.g(self.F(X), Y)


def paraherm_bracket(X: VectorField, Y: VectorField, S: ParaHermitianTM) -> VectorField:
    """``[X+, Y+] + sharp_g {L_{X+} flat Y- - L_{Y+} flat X- - 1/2 d omega(X, Y)}``.

    The 1-form in braces is read in ``W+*`` (it is restricted to ``W+``) before
    ``sharp_g`` identifies it with a section of ``W-``.
    """
    chart = S.chart
    Xp, Xm, Yp, Ym = S.F_plus(X), S.F_minus(X), S.F_plus(Y), S.F_minus(Y)
    flat = lambda V: DifferentialForm.from_dense(chart, S.g.matrix.apply(V.components))
    form = (
        _as_one_form(chart, lie_derivative(Xp, flat(Ym)))
        - _as_one_form(chart, lie_derivative(Yp, flat(Xm)))
        - _d(chart, S.omega(X, Y)) * (chart.one / 2)
    )
    restricted = S.F_plus.matrix.rapply(form.dense)
    return lie_bracket(Xp, Yp) + VectorField(chart, S.g.inverse.apply(restricted))


def paraherm_structure(S: ParaHermitianTM) -> CourantStructure:
    """``(TM, g/2, F+, [,]_{F+})`` as a skew structure."""
    chart = S.chart

    def rule(e1: ESection, e2: ESection) -> ESection:
        return ESection(chart, paraherm_bracket(VectorField(chart, e1.components), VectorField(chart, e2.components), S).components)

    return CourantStructure(
        chart, S.g.matrix.scale(chart.one / 2), S.F_plus.matrix, rule, "skew",
        [f"d/d{c}" for c in chart.coord_names], "paraherm",
    )


# ---------------------------------------------------------------------------
# anchors given by an endomorphism of TM


def _endo_derivative(christoffel, phi: EndomorphismField, Z: VectorField, X: VectorField) -> VectorField:
    # (nabla_Z phi)(X) = nabla_Z(phi X) - phi(nabla_Z X)
    return covariant_derivative_tm(christoffel, Z, phi(X)) - phi(covariant_derivative_tm(christoffel, Z, X))


def phi_torsion(phi: EndomorphismField, g: MetricOnTM) -> Callable[[VectorField, VectorField], VectorField]:
    """``T(X, Y) = phi(nabla_{phi X} Y - nabla_{phi Y} X) - [phi X, phi Y]`` for Levi-Civita ``nabla``."""
    G = levi_civita(g)

    def T(X: VectorField, Y: VectorField) -> VectorField:
        pX, pY = phi(X), phi(Y)
        return phi(covariant_derivative_tm(G, pX, Y) - covariant_derivative_tm(G, pY, X)) - lie_bracket(pX, pY)

    return T


def phi_torsion_alt(phi: EndomorphismField, g: MetricOnTM) -> Callable[[VectorField, VectorField], VectorField]:
    """Second form of the same torsion: ``(nabla_{phi Y} phi) X - (nabla_{phi X} phi) Y``."""
    G = levi_civita(g)

    def T(X: VectorField, Y: VectorField) -> VectorField:
        return _endo_derivative(G, phi, phi(Y), X) - _endo_derivative(G, phi, phi(X), Y)

    return T


def torsion_nijenhuis_residual(phi: EndomorphismField, g: MetricOnTM, X: VectorField, Y: VectorField) -> VectorField:
    """``T(X,Y) - [(phi o nabla_Y phi)(X) - (phi o nabla_X phi)(Y) - N_phi(X,Y)]``."""
    G = levi_civita(g)
    T = phi_torsion(phi, g)(X, Y)
    rhs = phi(_endo_derivative(G, phi, Y, X)) - phi(_endo_derivative(G, phi, X, Y)) - nijenhuis(phi)(X, Y)
    return T - rhs


def phi_gamma(phi: EndomorphismField, g: MetricOnTM, X: VectorField, Y: VectorField, christoffel=None) -> VectorField:
    """``g(gamma(X,Y), Z) = 1/2 [g(X, nabla_{phi Z} Y) - g(nabla_{phi Z} X, Y)]``."""
    chart = g.chart
    G = christoffel or levi_civita(g)
    vals = []
    for i in range(chart.dim):
        pZ = phi(VectorField.coordinate(chart, i))
        vals.append((g(X, covariant_derivative_tm(G, pZ, Y)) - g(covariant_derivative_tm(G, pZ, X), Y)) / 2)
    return VectorField(chart, g.inverse.apply(vals))


def _beta(g: MetricOnTM, B: DifferentialForm | None, X: VectorField, Y: VectorField) -> VectorField:
    chart = g.chart
    if B is None or B.is_zero():
        return VectorField.zero(chart)
    w = interior_product(Y, interior_product(X, B))
    return VectorField(chart, g.inverse.apply(_as_one_form(chart, w).dense))


def _check_beta(phi: EndomorphismField, g: MetricOnTM, B: DifferentialForm | None) -> None:
    chart = g.chart
    if B is not None and (not isinstance(B, DifferentialForm) or B.degree != 3):
        raise ShapeMismatch("B must be a 3-form")
    T = phi_torsion(phi, g)
    basis = [VectorField.coordinate(chart, i) for i in range(chart.dim)]
    for i in range(chart.dim):
        for j in range(i + 1, chart.dim):
            diff = phi(_beta(g, B, basis[i], basis[j])) - T(basis[i], basis[j])
            if not diff.is_zero():
                raise BetaTorsionMismatch(
                    f"phi(beta(d{i}, d{j})) differs from the phi-torsion by {diff}"
                )


def phi_bracket(X: VectorField, Y: VectorField, phi: EndomorphismField, g: MetricOnTM, B: DifferentialForm | None = None) -> VectorField:
    """``nabla_{phi X} Y - nabla_{phi Y} X - gamma(X,Y) - beta(X,Y)`` with Levi-Civita ``nabla``."""
    _check_beta(phi, g, B)
    G = levi_civita(g)
    return _phi_bracket(G, phi, g, B, X, Y)


def _phi_bracket(G, phi, g, B, X, Y) -> VectorField:
    return (
        covariant_derivative_tm(G, phi(X), Y)
        - covariant_derivative_tm(G, phi(Y), X)
        - phi_gamma(phi, g, X, Y, G)
        - _beta(g, B, X, Y)
    )


def phi_structure(phi: EndomorphismField, g: MetricOnTM, B: DifferentialForm | None = None) -> CourantStructure:
    """``(TM, g, phi)`` with the bracket of :func:`phi_bracket`."""
    _check_beta(phi, g, B)
    chart = g.chart
    G = levi_civita(g)

    def rule(e1: ESection, e2: ESection) -> ESection:
        v = _phi_bracket(G, phi, g, B, VectorField(chart, e1.components), VectorField(chart, e2.components))
        return ESection(chart, v.components)

    return CourantStructure(chart, g.matrix, phi.matrix, rule, "skew", [f"d/d{c}" for c in chart.coord_names], "phi")


def riemannian_triple(G: MetricOnTM, twist=None) -> CourantStructure:
    """Pre-Courant structure on ``TM + T*M + TM`` built by the transitive construction.

    :func:`courant.transitive.riemannian_triple_data` also returns the
    splitting, the suitable connection and the three-form.
    """
    from .transitive import riemannian_triple_data

    return riemannian_triple_data(G, _twist(twist))[0]

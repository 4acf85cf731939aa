import pytest
import sympy as sp
from hypothesis import given, strategies as st

from courant.calculus import Bivector, EndomorphismField, MetricOnTM, VectorField, exterior_derivative
from courant.core import ESection, EThreeForm, verify
from courant.errors import BetaTorsionMismatch, InvalidParaHermitian, NotPoisson
from courant.expr import parse_form
from courant.generalized import (
    GeneralizedSection,
    ParaHermitianTM,
    TwistForm,
    bialgebroid_bracket,
    courant_bracket,
    dorfman_product,
    koszul_bracket,
    pairing,
    paraherm_bracket,
    paraherm_structure,
    partial_of,
    phi_bracket,
    phi_gamma,
    phi_torsion,
    phi_torsion_alt,
    poisson_structure,
    riemannian_triple,
    torsion_nijenhuis_residual,
)
from courant.sampling import make_rng, random_polynomial
from courant.scalars import Chart
from courant.transitive import riemannian_triple_data

import oracle

XY = Chart(["x", "y"])
XYZ = Chart(["x", "y", "z"])
seeds = st.integers(0, 10**6)


def gs(chart, vf, form):
    return GeneralizedSection.of(chart, vf, form)


def rgs(chart, seed, degree=2):
    rng = make_rng(seed)
    comps = [random_polynomial(chart, rng, degree) for _ in range(2 * chart.dim)]
    return gs(chart, comps[: chart.dim], comps[chart.dim :])


def as_expr(e: GeneralizedSection):
    return oracle.vec(e.vf.components), oracle.vec(e.form.dense)


def test_pairing_examples():
    X = gs(XY, [1, 0], None)
    dx = gs(XY, None, [1, 0])
    assert pairing(X, dx, "g") == XY.scalar("1/2")
    assert pairing(X, dx, "omega") == XY.scalar("1/2")
    assert pairing(gs(XY, [1, 0], [0, "y"]), gs(XY, [0, 1], [1, 0]), "g") == XY.scalar("(1+y)/2")


@given(seeds, seeds)
def test_pairing_symmetry(a, b):
    e1, e2 = rgs(XY, a), rgs(XY, b)
    assert pairing(e1, e2, "g") == pairing(e2, e1, "g")
    assert pairing(e1, e2, "omega") == -pairing(e2, e1, "omega")


def test_partial_of_examples():
    assert partial_of(XY.scalar("x*y")) == gs(XY, None, ["y", "x"])
    assert partial_of(XY.one, XY).is_zero()


@given(seeds, seeds)
def test_partial_isotropy(a, b):
    rng = make_rng(a)
    f, h = random_polynomial(XY, rng), random_polynomial(XY, make_rng(b))
    assert pairing(partial_of(f, XY), partial_of(h, XY), "g") == XY.zero


def test_courant_bracket_examples():
    e1, e2 = gs(XY, [1, 0], None), gs(XY, None, ["y", 0])
    got = courant_bracket(e1, e2)
    assert got == gs(XY, None, [0, "-1/2"])
    x, y = oracle.symbols(XY)
    ref = oracle.courant([1, 0], [0, 0], [0, 0], [y, 0], [x, y])
    assert oracle.same_vec(as_expr(got)[1], ref[1])
    assert courant_bracket(gs(XY, [1, 2], [3, 4]), gs(XY, [5, 6], [7, 8])).is_zero()
    tw = TwistForm(parse_form("dx^dy^dz", XYZ))
    assert courant_bracket(gs(XYZ, [1, 0, 0], None), gs(XYZ, [0, 1, 0], None), tw) == gs(XYZ, None, [0, 0, 1])


@given(seeds, seeds)
def test_courant_and_dorfman_match_oracle(a, b):
    e1, e2 = rgs(XY, a), rgs(XY, b)
    xs = oracle.symbols(XY)
    X, al = as_expr(e1)
    Y, be = as_expr(e2)
    for mine, ref in ((courant_bracket(e1, e2), oracle.courant(X, al, Y, be, xs)), (dorfman_product(e1, e2), oracle.dorfman(X, al, Y, be, xs))):
        v, f = as_expr(mine)
        assert oracle.same_vec(v, ref[0]) and oracle.same_vec(f, ref[1])
    assert courant_bracket(e1, e2) == -courant_bracket(e2, e1)


@given(seeds, seeds)
def test_dorfman_is_courant_plus_partial(a, b):
    e1, e2 = rgs(XYZ, a, 1), rgs(XYZ, b, 1)
    assert dorfman_product(e1, e2) == courant_bracket(e1, e2) + partial_of(pairing(e1, e2, "g"), XYZ)


def test_dorfman_examples():
    e1, e2 = gs(XY, [1, 0], None), gs(XY, None, ["y", 0])
    assert dorfman_product(e1, e2).is_zero()
    assert dorfman_product(e1, e2) == courant_bracket(e1, e2) + partial_of(XY.scalar("y/2"), XY)
    e = gs(XY, [1, 0], ["x", 0])
    assert dorfman_product(e, e) == partial_of(pairing(e, e, "g"), XY) == gs(XY, None, [1, 0])
    assert dorfman_product(gs(XY, [1, 2], [3, 4]), gs(XY, [5, 6], [7, 8])).is_zero()


# --- Poisson data ---------------------------------------------------------------------


P_CONST = Bivector.from_terms(XY, {(0, 1): 1})
P_X = Bivector.from_terms(XY, {(0, 1): "x"})


def test_koszul_examples():
    dx, dy = parse_form("dx", XY), parse_form("dy", XY)
    assert koszul_bracket(dx, dy, P_CONST).is_zero()
    with pytest.raises(NotPoisson):
        koszul_bracket(parse_form("dx", XYZ), parse_form("dy", XYZ), Bivector.from_terms(XYZ, {(1, 2): "x", (0, 1): "y"}))


@given(seeds, seeds, seeds)
def test_koszul_properties(a, b, c):
    rng = make_rng(a)
    f, h, k = (random_polynomial(XY, rng, 2) for _ in range(3))
    df, dh = exterior_derivative(f, XY), exterior_derivative(h, XY)
    assert koszul_bracket(df, dh, P_X) == exterior_derivative(P_X.bracket(f, h), XY)
    al = rgs(XY, b).form
    be = rgs(XY, c).form
    lhs = koszul_bracket(al, be * k, P_X)
    rhs = koszul_bracket(al, be, P_X) * k + be * P_X.sharp(al)(k)
    assert lhs == rhs
    assert koszul_bracket(al, be, P_X) == -koszul_bracket(be, al, P_X)


@given(seeds, seeds)
def test_bialgebroid_reductions(a, b):
    e1, e2 = rgs(XY, a), rgs(XY, b)
    P0 = Bivector(XY, [[0, 0], [0, 0]])
    assert bialgebroid_bracket(e1, e2, P0, "skew") == courant_bracket(e1, e2)
    assert bialgebroid_bracket(e1, e2, P0, "product") == dorfman_product(e1, e2)
    half = XY.scalar("1/2")
    for P in (P_CONST, P_X):
        skew = bialgebroid_bracket(e1, e2, P, "skew")
        prod = (bialgebroid_bracket(e1, e2, P, "product") - bialgebroid_bracket(e2, e1, P, "product")) * half
        assert skew == prod


def test_poisson_partial_example():
    S = poisson_structure(P_CONST)
    d = S.partial(XY.scalar("x"))
    assert d == ESection(XY, [0, -1, 1, 0])
    assert S.anchor(d).is_zero()


def test_poisson_full_battery():
    for P in (P_CONST, P_X):
        for flavor in ("skew", "product"):
            rep = verify(poisson_structure(P, flavor), "all")
            assert rep.passed, rep.failing()


# --- para-Hermitian ---------------------------------------------------------------------


def _paraherm_constant():
    g = MetricOnTM(XY, [[0, 1], [1, 0]])
    F = EndomorphismField(XY, [[1, 0], [0, -1]])
    return ParaHermitianTM(g, F)


def test_paraherm_examples():
    S = _paraherm_constant()
    assert paraherm_bracket(VectorField(XY, [1, 0]), VectorField(XY, [0, 1]), S).is_zero()
    assert paraherm_bracket(VectorField(XY, [1, 0]), VectorField(XY, [3, 0]), S).is_zero()


def test_paraherm_validation():
    with pytest.raises(InvalidParaHermitian):
        ParaHermitianTM(MetricOnTM(XY, [[1, 0], [0, 1]]), EndomorphismField(XY, [[1, 0], [0, -1]]))
    with pytest.raises(InvalidParaHermitian):
        ParaHermitianTM(MetricOnTM(XY, [[0, 1], [1, 0]]), EndomorphismField(XY, [[0, 1], [0, 0]]))


@given(seeds, seeds)
def test_paraherm_skew(a, b):
    S = _paraherm_constant()
    rng = make_rng(a)
    X = VectorField(XY, [random_polynomial(XY, rng) for _ in range(2)])
    Y = VectorField(XY, [random_polynomial(XY, make_rng(b)) for _ in range(2)])
    assert paraherm_bracket(X, Y, S) == -paraherm_bracket(Y, X, S)


def test_paraherm_structure_anchor():
    S = paraherm_structure(_paraherm_constant())
    assert S.rho.rows == ((1, 0), (0, 0))


# --- phi-torsion and the phi-anchored bracket --------------------------------------------


def test_phi_torsion_examples():
    g = MetricOnTM(XY, [[1, 0], [0, 1]])
    T = phi_torsion(EndomorphismField(XY, [[1, 2], [0, 1]]), g)
    assert T(VectorField(XY, ["x", "y^2"]), VectorField(XY, ["x*y", 1])).is_zero()
    phi = EndomorphismField(XY, [[0, "x"], [0, 0]])
    X, Y = VectorField(XY, [1, 0]), VectorField(XY, [0, 1])
    assert torsion_nijenhuis_residual(phi, g, X, Y).is_zero()
    # independent expansion with sympy of (nabla_{phi Y} phi) X - (nabla_{phi X} phi) Y, flat nabla
    x, y = oracle.symbols(XY)
    M = sp.Matrix([[0, x], [0, 0]])
    Xs, Ys = sp.Matrix([1, 0]), sp.Matrix([0, 1])

    def dphi(Z):
        return sum((Z[i] * sp.diff(M, (x, y)[i]) for i in range(2)), sp.zeros(2, 2))

    ref = dphi(M * Ys) * Xs - dphi(M * Xs) * Ys
    assert oracle.same_vec(oracle.vec(phi_torsion(phi, g)(X, Y).components), list(ref))


@given(seeds, seeds, seeds)
def test_phi_torsion_forms_agree_and_tensorial(a, b, c):
    rng = make_rng(a)
    phi = EndomorphismField(XY, [[random_polynomial(XY, rng, 1) for _ in range(2)] for _ in range(2)])
    g = MetricOnTM(XY, [[1, 0], [0, 1]])
    X = VectorField(XY, [random_polynomial(XY, make_rng(b), 1) for _ in range(2)])
    Y = VectorField(XY, [random_polynomial(XY, make_rng(c), 1) for _ in range(2)])
    f = random_polynomial(XY, rng, 1)
    T = phi_torsion(phi, g)
    assert T(X, Y) == phi_torsion_alt(phi, g)(X, Y)
    assert T(X * f, Y) == T(X, Y) * f
    assert torsion_nijenhuis_residual(phi, g, X, Y).is_zero()


def test_phi_bracket_examples():
    g = MetricOnTM(XY, [[1, 0], [0, 1]])
    zero = EndomorphismField(XY, [[0, 0], [0, 0]])
    X, Y = VectorField(XY, ["x", "y"]), VectorField(XY, ["y^2", 1])
    assert phi_bracket(X, Y, zero, g).is_zero()
    const = EndomorphismField(XY, [[1, 2], [3, 4]])
    assert phi_bracket(VectorField(XY, [1, 2]), VectorField(XY, [3, 4]), const, g).is_zero()
    # a phi with nonzero phi-torsion needs a matching B
    with pytest.raises(BetaTorsionMismatch):
        phi_bracket(X, Y, EndomorphismField(XY, [[1, 0], [0, "x"]]), g)


@given(seeds, seeds)
def test_phi_gamma_skew(a, b):
    g = MetricOnTM(XY, [[1, 0], [0, "x^2+1"]])
    phi = EndomorphismField(XY, [[1, "y"], [0, 1]])
    X = VectorField(XY, [random_polynomial(XY, make_rng(a), 1) for _ in range(2)])
    Y = VectorField(XY, [random_polynomial(XY, make_rng(b), 1) for _ in range(2)])
    assert phi_gamma(phi, g, X, Y) == -phi_gamma(phi, g, Y, X)


# --- Riemannian triple -------------------------------------------------------------------


def test_triple_reduces_to_courant():
    G = MetricOnTM(XY, [[1, 0], [0, 1]])
    S = riemannian_triple(G)
    e1 = ESection(XY, [1, 0, 0, 0, 0, 0])
    e2 = ESection(XY, [0, 0, "y", 0, 0, 0])
    assert S.bracket(e1, e2) == ESection(XY, [0, 0, 0, "-1/2", 0, 0])


def test_triple_lambda_properties():
    G = MetricOnTM(XYZ, [[1, 0, 0], [0, 2, 0], [0, 0, 1]])
    S, T, N, Lam = riemannian_triple_data(G, TwistForm(parse_form("x*dx^dy^dz", XYZ)))
    assert isinstance(Lam, EThreeForm)
    d = S.partial(XYZ.scalar("x*y"))
    e1, e2 = S.frame(0), S.frame(7)
    assert Lam.lam(e1, d).is_zero() and Lam(e1, e2, d) == XYZ.zero
    rng = make_rng(3)
    for _ in range(3):
        a, b, c = (ESection(XYZ, [random_polynomial(XYZ, rng, 1) for _ in range(9)]) for _ in range(3))
        assert Lam(a, b, c) == -Lam(b, a, c) == Lam(b, c, a)

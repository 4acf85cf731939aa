import pytest
from hypothesis import given, settings, strategies as st

from courant.calculus import Bivector, MetricOnTM, lie_bracket
from courant.connections import PseudoEuclideanBundle, covariant_derivative, default_metric_connection, gamma_op, rho_torsion, whitney_sum
from courant.core import CourantStructure, ESection, EThreeForm, SampleSpec, verify
from courant.errors import AnchorNotSurjective, InvalidComponentConnection, InvalidLambda, IsotropyFails, RankTooSmall
from courant.expr import parse_form
from courant.generalized import TwistForm, poisson_structure, standard_structure, twist_lambda
from courant.sampling import make_rng, random_polynomial, random_sections
from courant.scalars import Chart
from courant.transitive import (
    b1_form,
    bracket1,
    component_conditions,
    decompose,
    general_bracket,
    induced_linear_connection,
    restricted_check,
    riemannian_triple_data,
    suitable_connection,
)

XY = Chart(["x", "y"])
XYZ = Chart(["x", "y", "z"])
XYZW = Chart(["x", "y", "z", "w"])
seeds = st.integers(0, 10**6)


def poisson_xy():
    return poisson_structure(Bivector.from_terms(XY, {(0, 1): "x"}))


def curved_metric():
    return MetricOnTM(XY, [[1, 0], [0, "x^2+1"]])


def q_part(e, n):
    return e.components[:n]


def star_part(e, n):
    return e.components[n : 2 * n]


# --- decomposition ----------------------------------------------------------------------------


def test_decompose_standard():
    S = standard_structure(XY)
    T = decompose(S)
    assert T.is_valid()
    assert not T.C
    # Q = TM, im d = T*M = K
    for q in T.Q:
        assert all(not c for c in star_part(ESection(XY, q), 2))
    for d in T.D:
        assert all(not c for c in q_part(ESection(XY, d), 2))
    assert len(T.K) == 2 and all(all(not c for c in k[:2]) for k in T.K)


def test_decompose_poisson():
    S = poisson_xy()
    T = decompose(S)
    assert T.is_valid()
    # Q = {X + 0}
    for q in T.Q:
        assert all(not c for c in star_part(ESection(XY, q), 2))
    # K = {X + alpha : X + sharp alpha = 0}
    for k in T.K:
        assert S.anchor(ESection(XY, k)).is_zero()
        assert any(k[:2]) and any(k[2:])


def test_decompose_triple():
    S, T, N, _ = riemannian_triple_data(curved_metric())
    assert T.is_valid()
    assert len(T.C) == 2
    # C is the last TM summand
    for c in T.C:
        assert all(not v for v in c[:4])
    assert T.gC == curved_metric().matrix


@pytest.mark.parametrize(
    "S",
    [
        standard_structure(XYZ, "skew", TwistForm(parse_form("x*dx^dy^dz", XYZ))),
        poisson_structure(Bivector.from_terms(XY, {(0, 1): "x^2+y"})),
    ],
)
def test_decompose_invariants(S):
    T = decompose(S)
    res = T.invariant_residuals()
    assert all(not v or (hasattr(v, "is_zero") and v.is_zero()) for v in res.values()), res
    n, r = T.n, T.rank
    assert len(T.K) == r - n and len(T.Q) == n and len(T.D) == n and len(T.C) == r - 2 * n


def test_decompose_errors():
    one = [[1, 0, 0], [0, 1, 0], [0, 0, 1]]
    with pytest.raises(AnchorNotSurjective):
        decompose(CourantStructure(XY, one, [[1, 0, 0], [2, 0, 0]], lambda a, b: a, "skew"))
    with pytest.raises(RankTooSmall):
        decompose(CourantStructure(XY, one, [[1, 0, 0], [0, 1, 0]], lambda a, b: a, "skew"))
    eye4 = [[1 if i == j else 0 for j in range(4)] for i in range(4)]
    with pytest.raises(IsotropyFails):
        decompose(CourantStructure(XY, eye4, [[1, 0, 0, 0], [0, 1, 0, 0]], lambda a, b: a, "skew"))


def test_decompose_is_deterministic():
    a, b = decompose(poisson_xy()), decompose(poisson_xy())
    assert (a.Q, a.D, a.C, a.K) == (b.Q, b.D, b.C, b.K)


def test_gamma_lands_in_im_d():
    S, T, N, _ = riemannian_triple_data(curved_metric())
    for e1, e2 in zip(random_sections(XY, 6, 2, 1, seed=3), random_sections(XY, 6, 2, 1, seed=4)):
        g = gamma_op(N.nabla, T.bundle, S.rho, e1, e2)
        assert T.project("imd", g) == g


# --- suitable connections ---------------------------------------------------------------------


def test_flat_standard_suitable_connection():
    T = decompose(standard_structure(XY))
    N = suitable_connection(T)
    assert all(G.is_zero() for G in N.nabla.christoffel)
    assert N.duality_residuals() == [] and N.splitting_residuals() == []
    assert all(G.is_zero() for G in induced_linear_connection(N))


def test_triple_connection_is_levi_civita_on_C():
    from courant.calculus import levi_civita

    G = curved_metric()
    _, T, N, _ = riemannian_triple_data(G)
    assert tuple(N.c_block) == tuple(levi_civita(G))
    assert N.duality_residuals() == [] and N.splitting_residuals() == []
    assert all(r.is_zero() for r in N.nabla.metric_residual())
    assert not N.is_flat()


def test_suitable_connection_with_q_block():
    T = decompose(poisson_xy())
    N = suitable_connection(T, nablaQ=[[[0, "y"], [0, 0]], [[0, 0], ["x", 0]]])
    assert N.duality_residuals() == [] and N.splitting_residuals() == []
    assert all(r.is_zero() for r in N.nabla.metric_residual())


def test_suitable_connection_errors():
    T = decompose(standard_structure(XY))
    with pytest.raises(InvalidComponentConnection):
        suitable_connection(T, nablaQ=[[[0]]])
    with pytest.raises(InvalidComponentConnection):
        suitable_connection(T, nablaC=[[[1]], [[0]]])
    _, T3, _, _ = riemannian_triple_data(MetricOnTM(XY, [[1, 0], [0, 1]]))
    with pytest.raises(InvalidComponentConnection):
        suitable_connection(T3, nablaC=[[[1, 0], [0, 0]], [[0, 0], [0, 0]]])


# --- B1 and bracket1 --------------------------------------------------------------------------


def _raw_b1(T, N, e1, e2, e3):
    B = T.bundle
    acc = T.chart.zero
    for a, b, c in ((e1, e2, e3), (e2, e3, e1), (e3, e1, e2)):
        acc = acc + B.pairing(T.sigma_of(rho_torsion(N.nabla, T.structure.rho, a, b)), T.project("imd", c))
    return acc


def test_b1_zero_without_torsion():
    T = decompose(standard_structure(XY))
    assert b1_form(T, suitable_connection(T)).is_zero()


@given(seeds)
def test_b1_matches_formula_and_torsion_condition(seed):
    T = decompose(poisson_xy())
    N = suitable_connection(T, nablaQ=[[[0, "y"], [0, 0]], [[0, 0], ["x", 0]]])
    B1 = b1_form(T, N)
    e1, e2, e3 = random_sections(XY, 4, 3, 1, seed=seed)
    assert B1(e1, e2, e3) == _raw_b1(T, N, e1, e2, e3)
    assert B1(e1, e2, e3) == -_raw_b1(T, N, e2, e1, e3)
    assert bracket1(T, N).conditions["beta_cancels_torsion"]() == []


def test_b1_poisson_flat_torsion_condition():
    T = decompose(poisson_xy())
    S1 = bracket1(T, suitable_connection(T))
    assert S1.conditions["beta_cancels_torsion"]() == []


@given(seeds)
def test_bracket1_is_courant_bracket_on_standard_data(seed):
    S = standard_structure(XY)
    T = decompose(S)
    S1 = bracket1(T, suitable_connection(T))
    e1, e2 = random_sections(XY, 4, 2, 2, seed=seed)
    assert S1.rule(e1, e2) == S.rule(e1, e2)


@given(seeds)
def test_bracket1_is_bialgebroid_bracket_on_poisson_data(seed):
    S = poisson_xy()
    T = decompose(S)
    S1 = bracket1(T, suitable_connection(T))
    e1, e2 = random_sections(XY, 4, 2, 2, seed=seed)
    assert S1.rule(e1, e2) == S.rule(e1, e2)


@given(seeds)
def test_bracket1_closed_forms(seed):
    S, T, N, _ = riemannian_triple_data(curved_metric())
    S1 = bracket1(T, N)
    rng = make_rng(seed)
    poly = lambda: random_polynomial(XY, rng, 1)
    q1, q2 = T.q_section([poly(), poly()]), T.q_section([poly(), poly()])
    f1, f2 = poly(), poly()
    c1, c2 = T.c_section([poly(), poly()]), T.c_section([poly(), poly()])
    r1, r2 = S1.anchor(q1), S1.anchor(q2)
    lhs = S1.rule(q1 + S1.partial(f1), q2 + S1.partial(f2))
    rhs = T.sigma_of(lie_bracket(r1, r2)) + (S1.partial(r1(f2)) - S1.partial(r2(f1))) * (XY.one / 2)
    assert lhs == rhs
    assert S1.rule(c1, c2) == -gamma_op(N.nabla, T.bundle, S.rho, c1, c2)
    assert S1.rule(c1, q1 + S1.partial(f1)) == -covariant_derivative(N.nabla, r1, c1)
    assert T.project("K", S1.rule(q1, q2)).is_zero()


def test_bracket1_pre_courant_and_flatness():
    spec = SampleSpec(trials=2, degree=1)
    _, T, N, _ = riemannian_triple_data(MetricOnTM(XY, [[1, 0], [0, 1]]))
    rep = verify(bracket1(T, N), "all", spec=spec)
    assert rep.passed, rep.failing()
    _, T, N, _ = riemannian_triple_data(curved_metric())
    rep = verify(bracket1(T, N), "all", spec=spec)
    assert not rep.status("jacobi_iii", "iii") and not rep.status("conditions", "flat")
    for ident in ("i", "iv", "v"):
        assert rep.status("skew_i_v", ident)


@settings(max_examples=4)
@given(seeds)
def test_bracket1_on_P_is_courant(seed):
    _, T, N, _ = riemannian_triple_data(curved_metric())
    S1 = bracket1(T, N)
    rng = make_rng(seed)
    poly = lambda: random_polynomial(XY, rng, 1)
    secs = [T.q_section([poly(), poly()]) + S1.partial(poly()) for _ in range(3)]
    rep = verify(S1, ["skew_i_v", "jacobi_iii"], sections=secs, conditions=False)
    assert rep.passed, rep.failing()


# --- lambda-modified brackets -----------------------------------------------------------------


def test_general_bracket_zero_lambda():
    T = decompose(standard_structure(XY))
    N = suitable_connection(T)
    e1, e2 = random_sections(XY, 4, 2, 2, seed=1)
    assert general_bracket(T, N, None).rule(e1, e2) == bracket1(T, N).rule(e1, e2)
    assert general_bracket(T, N, EThreeForm.zero(T.structure)).rule(e1, e2) == bracket1(T, N).rule(e1, e2)


@given(seeds)
def test_general_bracket_closed_twist_is_twisted_bracket(seed):
    phi = TwistForm(parse_form("(x*y+z)*dx^dy^dz", XYZ))
    S = standard_structure(XYZ)
    T = decompose(S)
    G = general_bracket(T, suitable_connection(T), twist_lambda(S, phi))
    e1, e2 = random_sections(XYZ, 6, 2, 1, seed=seed)
    assert G.rule(e1, e2) == standard_structure(XYZ, "skew", phi).rule(e1, e2)


def test_general_bracket_rejects_bad_lambda():
    S = standard_structure(XY)
    T = decompose(S)
    with pytest.raises(InvalidLambda):
        general_bracket(T, suitable_connection(T), EThreeForm(S, {(0, 1, 2): 1}))
    with pytest.raises(InvalidLambda):
        general_bracket(T, suitable_connection(T), EThreeForm(standard_structure(XYZ), {(0, 1, 2): 1}))


def test_component_conditions_standard():
    S = standard_structure(XY)
    T = decompose(S)
    res = component_conditions(T, suitable_connection(T), None)
    assert set(res) == {"qqq", "qqc", "qcc", "ccc"} and all(v == [] for v in res.values())


def test_component_conditions_nonclosed_twist():
    S = standard_structure(XYZW)
    T = decompose(S)
    N = suitable_connection(T)
    Lam = twist_lambda(S, TwistForm(parse_form("w*dx^dy^dz", XYZW)))
    f = [ESection(XYZW, q) for q in T.Q]
    args = {"qqq": [(f[0], f[1], f[2])]}
    res = component_conditions(T, N, Lam, args=args)
    assert res["qqq"]
    rep = verify(general_bracket(T, N, Lam), "jacobi_iii", sections=[f[0], f[1], f[2]], conditions=False)
    assert not rep.passed


def test_component_conditions_iff_jacobi():
    for chart, phi in ((XYZ, "x*dx^dy^dz"), (XYZW, "w*dx^dy^dz"), (XYZW, "x*dx^dy^dz")):
        S = standard_structure(chart)
        T = decompose(S)
        N = suitable_connection(T)
        Lam = twist_lambda(S, TwistForm(parse_form(phi, chart)))
        q = [ESection(chart, v) for v in T.Q]
        trip = (q[0], q[1], q[2] * chart.scalar("y"))
        res = component_conditions(T, N, Lam, args={"qqq": [trip]})
        rep = verify(general_bracket(T, N, Lam), "jacobi_iii", sections=list(trip), conditions=False)
        assert rep.passed == (res["qqq"] == [])


def test_component_conditions_triple_reported():
    _, T, N, _ = riemannian_triple_data(curved_metric())
    res = component_conditions(T, N, None, spec=SampleSpec(trials=1, degree=1))
    # curvature of G shows up in the qqc component
    assert res["qqc"] and res["qqq"] == []


def test_component_conditions_triple_with_lambda():
    G = MetricOnTM(XYZ, [[1, 0, 0], [0, 1, 0], [0, 0, 1]])
    _, T, N, Lam = riemannian_triple_data(G, TwistForm(parse_form("dx^dy^dz", XYZ)))
    res = component_conditions(T, N, Lam, spec=SampleSpec(trials=1, degree=1))
    # residuals are computed for every argument type; no value is expected
    assert set(res) == {"qqq", "qqc", "qcc", "ccc"}


def test_component_conditions_flat_triple():
    _, T, N, _ = riemannian_triple_data(MetricOnTM(XY, [[1, 0], [0, 1]]))
    res = component_conditions(T, N, None, spec=SampleSpec(trials=2, degree=1))
    assert all(v == [] for v in res.values())


# --- restricted algebroids --------------------------------------------------------------------


def test_restricted_closed_twist_passes():
    S = standard_structure(XYZ)
    T = decompose(S)
    rep = restricted_check(T, suitable_connection(T), twist_lambda(S, TwistForm(parse_form("x*y*dx^dy^dz", XYZ))))
    assert rep.passed, str(rep)
    assert {l.identity for l in rep.lines} == {"lambda(q,q) in im d", "cocycle on Q"}


def test_restricted_nonclosed_twist_fails_with_witness():
    S = standard_structure(XYZW)
    T = decompose(S)
    rep = restricted_check(T, suitable_connection(T), twist_lambda(S, TwistForm(parse_form("w*dx^dy^dz", XYZW))))
    assert not rep.status("restricted", "cocycle on Q")
    line = [l for l in rep.lines if l.identity == "cocycle on Q"][0]
    assert line.witness.startswith("(q1, q2, q3)")


def test_restricted_whitney_sum_with_flat_C():
    base = standard_structure(XY)
    C = PseudoEuclideanBundle(XY, [[1, 0], [0, -1]])
    W = whitney_sum(base, C, default_metric_connection(C))
    T = decompose(W)
    N = suitable_connection(T)
    rep = restricted_check(T, N, None)
    assert rep.passed, str(rep)
    S1 = bracket1(T, N)
    for e1, e2 in zip(random_sections(XY, 6, 2, 1, seed=2), random_sections(XY, 6, 2, 1, seed=3)):
        assert S1.rule(e1, e2) == W.rule(e1, e2)


def test_restricted_reports_curved_C():
    _, T, N, _ = riemannian_triple_data(curved_metric())
    rep = restricted_check(T, N, None)
    assert not rep.status("restricted", "C connection flat")
    assert rep.status("restricted", "lambda(c,q) = 0")


@settings(max_examples=5)
@given(seeds)
def test_obstruction0_matches_core_with_b1(seed):
    from courant.connections import obstruction0
    from courant.core import obstructions

    T = decompose(poisson_xy())
    N = suitable_connection(T, nablaQ=[[[0, "y"], [0, 0]], [[0, 0], ["x", 0]]])
    B1 = b1_form(T, N)
    assert not B1.is_zero()
    e1, e2, e3 = random_sections(XY, 4, 3, 1, seed=seed)
    _, C = obstruction0(N.nabla, T.bundle, T.structure.rho, B1, e1, e2, e3)
    assert C == obstructions(bracket1(T, N), e1, e2, e3)[2]

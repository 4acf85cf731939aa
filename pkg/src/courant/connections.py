"""Metric connections on trivial pseudo-Euclidean bundles and brackets built from them.

A connection is given by Christoffel matrices ``Gamma[i]`` (one per
coordinate), acting by ``nabla_{d_i} e = d_i e + Gamma[i] e`` on component
columns.  It is metric when ``d_i gE = Gamma[i]^T gE + gE Gamma[i]``.
"""

from __future__ import annotations

from functools import cached_property
from itertools import combinations
from typing import Callable, Iterable, Sequence

from .calculus import VectorField, lie_bracket
from .core import CourantStructure, ESection, EThreeForm, convert
from .errors import (
    AnchorNotLeafwise,
    ChartMismatch,
    NotFoliatedMetric,
    NotMetricConnection,
    PropertyIFails,
    ShapeMismatch,
    SingularMetric,
)
from .linalg import Matrix
from .scalars import Chart, RationalScalar

__all__ = [
    "PseudoEuclideanBundle",
    "MetricConnection",
    "default_metric_connection",
    "covariant_derivative",
    "curvature",
    "curvature_on",
    "rho_torsion",
    "gamma_op",
    "bracket0",
    "bracket_with_beta",
    "bianchi_sum",
    "obstruction0",
    "whitney_sum",
    "whitney_mixed_defect",
    "adapted_connection",
    "foliated_bracket",
]


class PseudoEuclideanBundle:
    """Trivial bundle of rank r with a symmetric nondegenerate fiber metric."""

    def __init__(self, chart: Chart, gE, labels: Sequence[str] | None = None):
        gE = (gE if isinstance(gE, Matrix) else Matrix(gE)).map(chart.scalar)
        r = gE.shape[0]
        if gE.shape != (r, r) or not gE.is_symmetric():
            raise ShapeMismatch("fiber metric must be a symmetric square matrix")
        if not gE.det():
            raise SingularMetric("fiber metric is degenerate")
        self.chart = chart
        self.gE = gE
        self.rank = r
        self.labels = tuple(labels) if labels else tuple(f"e{a + 1}" for a in range(r))

    @cached_property
    def gE_inv(self) -> Matrix:
        return self.gE.inverse()

    def pairing(self, e1: ESection, e2: ESection) -> RationalScalar:
        return self.gE.bilinear(e1.components, e2.components)

    def frame(self, a: int) -> ESection:
        return ESection.basis(self.chart, self.rank, a)

    @property
    def frame_sections(self) -> list[ESection]:
        return [self.frame(a) for a in range(self.rank)]

    def section(self, comps) -> ESection:
        e = ESection(self.chart, comps)
        if e.rank != self.rank:
            raise ShapeMismatch(f"section of rank {e.rank} for a rank-{self.rank} bundle")
        return e

    @classmethod
    def of(cls, S: CourantStructure) -> "PseudoEuclideanBundle":
        return cls(S.chart, S.gE, S.labels)


class MetricConnection:
    """Christoffel matrices satisfying the metric identity exactly."""

    def __init__(self, bundle: PseudoEuclideanBundle, christoffel: Sequence, check: bool = True):
        chart = bundle.chart
        mats = tuple((m if isinstance(m, Matrix) else Matrix(m)).map(chart.scalar) for m in christoffel)
        if len(mats) != chart.dim:
            raise ShapeMismatch(f"need {chart.dim} Christoffel matrices, got {len(mats)}")
        for m in mats:
            if m.shape != (bundle.rank, bundle.rank):
                raise ShapeMismatch(f"Christoffel matrix of shape {m.shape} for rank {bundle.rank}")
        self.bundle = bundle
        self.chart = chart
        self.christoffel = mats
        if check:
            for i, res in enumerate(self.metric_residual()):
                if not res.is_zero():
                    raise NotMetricConnection(f"metric identity fails in direction {chart.coord_names[i]}: {res!r}")

    def metric_residual(self) -> list[Matrix]:
        g = self.bundle.gE
        return [g.map(lambda v, i=i: v.diff(i)) - G.T @ g - g @ G for i, G in enumerate(self.christoffel)]

    def __call__(self, X: VectorField, e: ESection) -> ESection:
        return covariant_derivative(self, X, e)

    @cached_property
    def curvature(self) -> dict[tuple[int, int], Matrix]:
        return curvature(self)

    def is_flat(self) -> bool:
        return all(m.is_zero() for m in self.curvature.values())


def default_metric_connection(B: PseudoEuclideanBundle) -> MetricConnection:
    """``Gamma[i] = 1/2 gE^-1 d_i gE``."""
    half = B.chart.one / 2
    mats = [(B.gE_inv @ B.gE.map(lambda v, i=i: v.diff(i))).scale(half) for i in range(B.chart.dim)]
    return MetricConnection(B, mats)


def covariant_derivative(nabla: MetricConnection, X: VectorField, e: ESection) -> ESection:
    """``nabla_X e = X^i (d_i e + Gamma[i] e)``."""
    if X.chart != nabla.chart or e.chart != nabla.chart:
        raise ChartMismatch("connection, vector and section on different charts")
    r = nabla.bundle.rank
    if e.rank != r:
        raise ShapeMismatch(f"section of rank {e.rank} for a rank-{r} bundle")
    out = [nabla.chart.zero] * r
    for i, xi in enumerate(X.components):
        if not xi:
            continue
        ge = nabla.christoffel[i].apply(e.components)
        for a in range(r):
            t = e.components[a].diff(i) + ge[a]
            if t:
                out[a] = out[a] + xi * t
    return ESection(nabla.chart, out)


def curvature(nabla: MetricConnection) -> dict[tuple[int, int], Matrix]:
    """``R_ij = d_i Gamma_j - d_j Gamma_i + Gamma_i Gamma_j - Gamma_j Gamma_i`` for ``i < j``."""
    G = nabla.christoffel
    out = {}
    for i, j in combinations(range(nabla.chart.dim), 2):
        out[(i, j)] = (
            G[j].map(lambda v: v.diff(i)) - G[i].map(lambda v: v.diff(j)) + G[i] @ G[j] - G[j] @ G[i]
        )
    return out


def curvature_on(nabla: MetricConnection, X: VectorField, Y: VectorField, e: ESection) -> ESection:
    """``R(X, Y) e`` (tensorial)."""
    chart = nabla.chart
    out = ESection.zero(chart, nabla.bundle.rank)
    for (i, j), R in nabla.curvature.items():
        c = X[i] * Y[j] - X[j] * Y[i]
        if c:
            out = out + ESection(chart, R.apply(e.components)) * c
    return out


def _anchor(rho: Matrix, chart: Chart, e: ESection) -> VectorField:
    return VectorField(chart, rho.apply(e.components))


def _as_rho(rho, chart: Chart) -> Matrix:
    return (rho if isinstance(rho, Matrix) else Matrix(rho)).map(chart.scalar)


def rho_torsion(nabla: MetricConnection, rho, e1: ESection, e2: ESection) -> VectorField:
    """``rho(nabla_{rho e1} e2 - nabla_{rho e2} e1) - [rho e1, rho e2]``."""
    chart = nabla.chart
    rho = _as_rho(rho, chart)
    if rho.shape != (chart.dim, nabla.bundle.rank):
        raise ShapeMismatch(f"anchor of shape {rho.shape}")
    r1, r2 = _anchor(rho, chart, e1), _anchor(rho, chart, e2)
    inner = covariant_derivative(nabla, r1, e2) - covariant_derivative(nabla, r2, e1)
    return _anchor(rho, chart, inner) - lie_bracket(r1, r2)


def gamma_op(nabla: MetricConnection, B: PseudoEuclideanBundle, rho, e1: ESection, e2: ESection) -> ESection:
    """``g(gamma(e1,e2), e) = 1/2 [g(e1, nabla_{rho e} e2) - g(e2, nabla_{rho e} e1)]``, solved on the frame."""
    chart = B.chart
    rho = _as_rho(rho, chart)
    vals = []
    for a in range(B.rank):
        X = VectorField(chart, rho.col(a))
        if X.is_zero():
            vals.append(chart.zero)
            continue
        v = B.pairing(e1, covariant_derivative(nabla, X, e2)) - B.pairing(e2, covariant_derivative(nabla, X, e1))
        vals.append(v / 2)
    return ESection(chart, B.gE_inv.apply(vals))


def _bracket0_fn(nabla, B, rho):
    chart = B.chart

    def br(e1: ESection, e2: ESection) -> ESection:
        r1, r2 = _anchor(rho, chart, e1), _anchor(rho, chart, e2)
        return covariant_derivative(nabla, r1, e2) - covariant_derivative(nabla, r2, e1) - gamma_op(nabla, B, rho, e1, e2)

    return br


def bracket0(nabla: MetricConnection, B: PseudoEuclideanBundle, rho, name: str = "bracket0") -> CourantStructure:
    """``[e1,e2]_0 = nabla_{rho e1} e2 - nabla_{rho e2} e1 - gamma(e1, e2)``."""
    rho = _as_rho(rho, B.chart)
    return bracket_with_beta(nabla, B, rho, None, name=name)


def _torsion_condition(nabla, B, rho, Bform) -> Callable[[], list]:
    # B(e_a, e_b, d x^k) - 1/2 T(e_a, e_b)(x^k) on frame pairs and coordinates
    def check():
        chart = B.chart
        S = CourantStructure(chart, B.gE, rho, lambda a, b: a, "skew", B.labels)
        frame = B.frame_sections
        out = []
        for a, b in combinations(range(B.rank), 2):
            T = rho_torsion(nabla, rho, frame[a], frame[b])
            for k in range(chart.dim):
                lhs = Bform(frame[a], frame[b], S.partial(chart.coord(k))) if Bform is not None else chart.zero
                res = lhs - T[k] / 2
                if res:
                    out.append(res)
        return out

    return check


def bracket_with_beta(
    nabla: MetricConnection,
    B: PseudoEuclideanBundle,
    rho,
    Bform: EThreeForm | None,
    name: str = "bracket-beta",
) -> CourantStructure:
    """``[e1,e2]_0 - beta(e1,e2)`` with ``g(beta(e1,e2), e3) = B(e1,e2,e3)``.

    The torsion condition ``B(e1,e2,d f) = 1/2 T(e1,e2) f`` is attached as
    ``conditions['beta_cancels_torsion']``.
    """
    chart = B.chart
    rho = _as_rho(rho, chart)
    if rho.shape != (chart.dim, B.rank):
        raise ShapeMismatch(f"anchor of shape {rho.shape} for rank {B.rank}")
    br0 = _bracket0_fn(nabla, B, rho)
    if Bform is None or Bform.is_zero():
        rule = br0
    else:

        def rule(e1: ESection, e2: ESection) -> ESection:
            return br0(e1, e2) - Bform.lam(e1, e2)

    conds = {"beta_cancels_torsion": _torsion_condition(nabla, B, rho, Bform)}
    return CourantStructure(chart, B.gE, rho, rule, "skew", B.labels, name, conds)


def _cycl(e1, e2, e3):
    return ((e1, e2, e3), (e2, e3, e1), (e3, e1, e2))


def bianchi_sum(
    nabla: MetricConnection,
    B: PseudoEuclideanBundle,
    rho,
    e1: ESection,
    e2: ESection,
    e3: ESection,
) -> ESection:
    """``sum_cycl {(nabla_{rho e3} gamma)(e1,e2) + gamma(gamma(e1,e2),e3) - R(rho e1, rho e2) e3}``.

    ``nabla gamma`` is taken as if ``gamma`` were a tensor.  This equals the
    jacobiator of ``[,]_0`` only when the rho-torsion vanishes.
    """
    chart = B.chart
    rho = _as_rho(rho, chart)
    gam = lambda a, b: gamma_op(nabla, B, rho, a, b)
    nab = lambda X, e: covariant_derivative(nabla, X, e)
    anc = lambda e: _anchor(rho, chart, e)
    out = ESection.zero(chart, B.rank)
    for a, b, c in _cycl(e1, e2, e3):
        X = anc(c)
        dgam = nab(X, gam(a, b)) - gam(nab(X, a), b) - gam(a, nab(X, b))
        out = out + dgam + gam(gam(a, b), c) - curvature_on(nabla, anc(a), anc(b), c)
    return out


def obstruction0(
    nabla: MetricConnection,
    B: PseudoEuclideanBundle,
    rho,
    Bform: EThreeForm | None,
    e1: ESection,
    e2: ESection,
    e3: ESection,
) -> tuple[ESection, ESection]:
    """``(C0, C)`` from the connection data.

    ``C0 = J0 - 1/3 d sum_cycl g([e1,e2]_0, e3)`` with ``J0`` the jacobiator of
    ``[,]_0`` (see :func:`bianchi_sum` for its connection form when the
    rho-torsion is zero), and
    ``C = C0 + d B(e1,e2,e3) + sum_cycl {beta(beta(e1,e2),e3) - beta([e1,e2]_0,e3) - [beta(e1,e2),e3]_0}``.
    """
    chart = B.chart
    rho = _as_rho(rho, chart)
    S = bracket_with_beta(nabla, B, rho, Bform)
    _require_property_i(nabla, B, rho, Bform, S)
    br0 = _bracket0_fn(nabla, B, rho)
    C0 = ESection.zero(chart, B.rank)
    trace = chart.zero
    for a, b, c in _cycl(e1, e2, e3):
        ab = br0(a, b)
        trace = trace + B.pairing(ab, c)
        C0 = C0 + br0(ab, c)
    C0 = C0 - S.partial(trace) * (chart.one / 3)
    if Bform is None or Bform.is_zero():
        return C0, C0
    beta = Bform.lam
    C = C0 + S.partial(Bform(e1, e2, e3))
    for a, b, c in _cycl(e1, e2, e3):
        bab = beta(a, b)
        C = C + beta(bab, c) - beta(br0(a, b), c) - br0(bab, c)
    return C0, C


def _require_property_i(nabla, B, rho, Bform, S: CourantStructure) -> None:
    if not S.anchor_isotropy_residual().is_zero():
        raise PropertyIFails("anchor is not isotropic: rho gE^-1 rho^T != 0")
    frame = B.frame_sections
    for a, b in combinations(range(B.rank), 2):
        T = rho_torsion(nabla, rho, frame[a], frame[b])
        rb = _anchor(rho, B.chart, Bform.lam(frame[a], frame[b])) if Bform is not None else VectorField.zero(B.chart)
        if not (rb - T).is_zero():
            raise PropertyIFails(f"rho(beta) differs from the rho-torsion on ({B.labels[a]}, {B.labels[b]}): {rb - T}")


# ---------------------------------------------------------------------------
# Whitney sums


def whitney_sum(S: CourantStructure, C: PseudoEuclideanBundle, nablaC: MetricConnection, name: str | None = None) -> CourantStructure:
    """``E + C`` with metric ``g + g0``, anchor ``rho + 0`` and the brackets

    ``[e, c] = nabla_{rho e} c`` and ``[c1, c2] = -gamma0(c1, c2)``, where
    ``g(gamma0(c1,c2), e) = 1/2 [g0(c1, nabla_{rho e} c2) - g0(c2, nabla_{rho e} c1)]``.
    Flatness of ``nablaC`` is attached as ``conditions['flat']``.
    """
    if S.chart != C.chart or nablaC.chart != S.chart:
        raise ChartMismatch("Whitney summands over different charts")
    chart = S.chart
    r, s = S.rank, C.rank
    br = convert(S, "product->skew").rule
    zero = chart.zero
    gE = Matrix.block_diag([S.gE, C.gE], zero)
    rho = Matrix([list(row) + [zero] * s for row in S.rho.rows])

    def split(e: ESection) -> tuple[ESection, ESection]:
        return ESection(chart, e.components[:r]), ESection(chart, e.components[r:])

    def gamma0(c1: ESection, c2: ESection) -> ESection:
        vals = []
        for a in range(r):
            X = VectorField(chart, S.rho.col(a))
            if X.is_zero():
                vals.append(zero)
                continue
            v = C.pairing(c1, covariant_derivative(nablaC, X, c2)) - C.pairing(c2, covariant_derivative(nablaC, X, c1))
            vals.append(v / 2)
        return ESection(chart, S.gE_inv.apply(vals))

    def rule(x1: ESection, x2: ESection) -> ESection:
        e1, c1 = split(x1)
        e2, c2 = split(x2)
        top = br(e1, e2) - gamma0(c1, c2)
        bottom = covariant_derivative(nablaC, S.anchor(e1), c2) - covariant_derivative(nablaC, S.anchor(e2), c1)
        return ESection(chart, top.components + bottom.components)

    def flat():
        return [m for m in nablaC.curvature.values() if not m.is_zero()]

    conds = dict(S.conditions)
    conds["flat"] = flat
    labels = tuple(S.labels) + tuple(f"c:{l}" for l in C.labels)
    return CourantStructure(chart, gE, rho, rule, "skew", labels, name or f"{S.name or 'E'}+C", conds)


def whitney_mixed_defect(S: CourantStructure, nablaC: MetricConnection, e1: ESection, e2: ESection, c: ESection) -> ESection:
    """Expected jacobiator on ``(e1, e2, c)``: ``-R(rho e1, rho e2) c`` placed in the C block."""
    R = curvature_on(nablaC, S.anchor(e1), S.anchor(e2), c)
    return ESection(S.chart, [S.chart.zero] * S.rank + list((-R).components))


# ---------------------------------------------------------------------------
# product foliations


def _leaf_indices(chart: Chart, leaf: Iterable) -> tuple[int, ...]:
    out = []
    for i in leaf:
        i = chart.index(i) if isinstance(i, str) else i
        chart.check_index(i)
        out.append(i)
    return tuple(sorted(set(out)))


def adapted_connection(B: PseudoEuclideanBundle, leaf: Iterable) -> MetricConnection:
    """Zero Christoffels along leaf coordinates, the default connection transversally.

    The frame is the projectable frame, so ``nabla_X e = sum (X f_a) e_a`` for
    leafwise ``X``.
    """
    chart = B.chart
    leaf_ix = _leaf_indices(chart, leaf)
    for i in leaf_ix:
        if not B.gE.map(lambda v: v.diff(i)).is_zero():
            raise NotFoliatedMetric(f"fiber metric depends on the leaf coordinate {chart.coord_names[i]}")
    default = default_metric_connection(B).christoffel
    zero = Matrix.zeros(B.rank, B.rank, chart.zero)
    return MetricConnection(B, [zero if i in leaf_ix else default[i] for i in range(chart.dim)])


def foliated_bracket(B: PseudoEuclideanBundle, leaf: Iterable, rho, Bform: EThreeForm | None) -> CourantStructure:
    """``[e1,e2]_0 - beta`` for an adapted connection; reports both foliated conditions.

    ``beta_anchor``: ``rho(beta(e1,e2)) + [rho e1, rho e2]`` and
    ``beta_cyclic``: ``sum_cycl beta(beta(e1,e2),e3) - sum_cycl [beta(e1,e2),e3]_0``,
    both on the (projectable) frame.
    """
    chart = B.chart
    rho = _as_rho(rho, chart)
    leaf_ix = _leaf_indices(chart, leaf)
    for k in range(chart.dim):
        if k not in leaf_ix and any(rho.row(k)):
            raise AnchorNotLeafwise(f"anchor has a component along the transverse coordinate {chart.coord_names[k]}")
    nabla = adapted_connection(B, leaf_ix)
    S = bracket_with_beta(nabla, B, rho, Bform, name="foliated")
    br0 = _bracket0_fn(nabla, B, rho)
    frame = B.frame_sections

    def beta(a, b):
        if Bform is None:
            return ESection.zero(chart, B.rank)
        return Bform.lam(a, b)

    def fol1():
        out = []
        for a, b in combinations(range(B.rank), 2):
            v = _anchor(rho, chart, beta(frame[a], frame[b])) + lie_bracket(
                _anchor(rho, chart, frame[a]), _anchor(rho, chart, frame[b])
            )
            if not v.is_zero():
                out.append(v)
        return out

    def fol2():
        out = []
        for a, b, c in combinations(range(B.rank), 3):
            acc = ESection.zero(chart, B.rank)
            for x, y, z in _cycl(frame[a], frame[b], frame[c]):
                bxy = beta(x, y)
                acc = acc + beta(bxy, z) - br0(bxy, z)
            if not acc.is_zero():
                out.append(acc)
        return out

    S.conditions["beta_anchor"] = fol1
    S.conditions["beta_cyclic"] = fol2
    S.nabla = nabla
    return S

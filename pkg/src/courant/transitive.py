"""Transitive Courant algebroids: splitting, suitable connections and the brackets they induce.

For a surjective anchor the bundle splits g-orthogonally as
``E = (Q + im d) + C`` with ``Q`` isotropic, ``rho|_Q`` invertible with
inverse ``sigma`` and ``K = ker rho = im d + C``.  All subspace computations
run over the rational-function field, so they hold off the locus where some
pivot vanishes.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property
from itertools import combinations
from typing import Sequence

from .calculus import MetricOnTM, VectorField, levi_civita, lie_bracket
from .connections import (
    MetricConnection,
    PseudoEuclideanBundle,
    bracket_with_beta,
    covariant_derivative,
    curvature_on,
    gamma_op,
    rho_torsion,
)
from .core import (
    CourantStructure,
    ESection,
    EThreeForm,
    Report,
    SampleSpec,
    format_value,
    lambda_differential,
)
from .errors import (
    AnchorNotSurjective,
    InvalidComponentConnection,
    InvalidLambda,
    IsotropyFails,
    RankTooSmall,
    SingularMetric,
)
from .linalg import Matrix
from .sampling import make_rng, random_polynomial

__all__ = [
    "TransitiveData",
    "SuitableConnection",
    "decompose",
    "suitable_connection",
    "induced_linear_connection",
    "b1_form",
    "bracket1",
    "general_bracket",
    "check_lambda",
    "component_conditions",
    "component_rhs",
    "restricted_check",
    "riemannian_triple_data",
    "triple_lambda",
]


def _span_rank(vectors) -> int:
    return Matrix(list(vectors)).rank() if vectors else 0


@dataclass(frozen=True, eq=False)
class TransitiveData:
    """A fixed splitting ``E = Q + im d + C`` of a Courant vector bundle with surjective anchor.

    ``Q``, ``D`` (the sections ``d x^i``) and ``C`` are lists of component
    tuples; ``frame`` has them as columns in that order.
    """

    structure: CourantStructure
    K: tuple
    Q: tuple
    D: tuple
    C: tuple

    @property
    def chart(self):
        return self.structure.chart

    @property
    def n(self) -> int:
        return self.chart.dim

    @property
    def rank(self) -> int:
        return self.structure.rank

    @cached_property
    def bundle(self) -> PseudoEuclideanBundle:
        return PseudoEuclideanBundle.of(self.structure)

    @cached_property
    def frame(self) -> Matrix:
        return Matrix.from_columns(list(self.Q) + list(self.D) + list(self.C))

    @cached_property
    def frame_inv(self) -> Matrix:
        return self.frame.inverse()

    @cached_property
    def sigma(self) -> Matrix:
        """``r x n`` matrix of ``sigma: TM -> Q``."""
        return Matrix.from_columns(list(self.Q))

    def _projector(self, lo: int, hi: int) -> Matrix:
        chart = self.chart
        sel = Matrix([[chart.one if i == j and lo <= i < hi else chart.zero for j in range(self.rank)] for i in range(self.rank)])
        return self.frame @ sel @ self.frame_inv

    @cached_property
    def p_Q(self) -> Matrix:
        return self._projector(0, self.n)

    @cached_property
    def p_imd(self) -> Matrix:
        return self._projector(self.n, 2 * self.n)

    @cached_property
    def p_C(self) -> Matrix:
        return self._projector(2 * self.n, self.rank)

    @cached_property
    def p_P(self) -> Matrix:
        return self._projector(0, 2 * self.n)

    @cached_property
    def p_K(self) -> Matrix:
        return self._projector(self.n, self.rank)

    def project(self, which: str, e: ESection) -> ESection:
        return ESection(self.chart, getattr(self, "p_" + which).apply(e.components))

    def sigma_of(self, X: VectorField) -> ESection:
        return ESection(self.chart, self.sigma.apply(X.components))

    def q_section(self, coeffs) -> ESection:
        return ESection(self.chart, self.sigma.apply(self.chart.scalars(coeffs)))

    def c_section(self, coeffs) -> ESection:
        if not self.C:
            return ESection.zero(self.chart, self.rank)
        return ESection(self.chart, Matrix.from_columns(list(self.C)).apply(self.chart.scalars(coeffs)))

    @cached_property
    def gC(self) -> Matrix:
        """Metric of ``C`` in the ``C`` frame."""
        if not self.C:
            return Matrix([])
        Cm = Matrix.from_columns(list(self.C))
        return Cm.T @ self.structure.gE @ Cm

    def invariant_residuals(self) -> dict[str, object]:
        """Named residuals of the splitting invariants; all vanish for a valid splitting."""
        S = self.structure
        g = S.gE
        chart = self.chart
        n, r = self.n, self.rank
        out: dict[str, object] = {}
        out["Q isotropic"] = [g.bilinear(a, b) for a in self.Q for b in self.Q if g.bilinear(a, b)]
        out["rho sigma = Id"] = (S.rho @ self.sigma) - Matrix.identity(n, chart.one, chart.zero)
        out["P orthogonal to C"] = [g.bilinear(a, c) for a in self.Q + self.D for c in self.C if g.bilinear(a, c)]
        out["im d in K"] = [v for d in self.D for v in S.rho.apply(d) if v]
        out["C in K"] = [v for c in self.C for v in S.rho.apply(c) if v]
        I = Matrix.identity(r, chart.one, chart.zero)
        out["projectors sum"] = self.p_Q + self.p_imd + self.p_C - I
        out["projectors idempotent"] = [p @ p - p for p in (self.p_Q, self.p_imd, self.p_C) if not (p @ p - p).is_zero()]
        k = len(self.K)
        Kperp = _orthogonal(g, list(self.K))
        # K^perp = im d: equal dimension n and im d + K^perp spans only n directions
        rank_diff = abs(_span_rank(Kperp) - n) + abs(_span_rank(list(Kperp) + list(self.D)) - n)
        out["K^perp = im d"] = [rank_diff] if rank_diff else []
        s = _span_rank(list(self.K) + list(Kperp))
        out["s = k"] = [s - k] if s != k else []
        out["k = r - n"] = [k - (r - n)] if k != r - n else []
        return out

    def is_valid(self) -> bool:
        from .core import is_zero

        return all(is_zero(v) for v in self.invariant_residuals().values())


def _orthogonal(g: Matrix, vectors: list) -> list[tuple]:
    if not vectors:
        return list(Matrix.identity(g.shape[0]).columns)
    A = Matrix([g.rapply(v) for v in vectors])
    return A.nullspace()


def decompose(S: CourantStructure) -> TransitiveData:
    """Deterministic splitting ``E = (Q + im d) + C`` for a surjective, isotropic anchor.

    ``Q`` starts from the columns of ``rho`` picked out by row reduction and is
    made isotropic by ``q_i -> q_i - sum_j g(q_i, q_j) d x^j``; ``C`` is the
    g-orthogonal complement of ``Q + im d``.
    """
    chart = S.chart
    n, r = chart.dim, S.rank
    rho = S.rho
    _, pivots = rho.rref()
    if len(pivots) < n:
        raise AnchorNotSurjective(f"anchor has rank {len(pivots)} < {n}")
    if r < 2 * n:
        raise RankTooSmall(f"rank {r} is below the minimal transitive rank {2 * n}")
    if not S.anchor_isotropy_residual().is_zero():
        raise IsotropyFails("rho gE^-1 rho^T is not zero")
    K = tuple(rho.nullspace())
    sub_inv = rho.submatrix(list(range(n)), list(pivots)).inverse()
    zero = chart.zero
    q0 = []
    for i in range(n):
        col = sub_inv.col(i)
        v = [zero] * r
        for p, c in zip(pivots, col):
            v[p] = c
        q0.append(tuple(v))
    D = tuple(S.partial(chart.coord(j)).components for j in range(n))
    g = S.gE
    Q = []
    for i in range(n):
        v = list(q0[i])
        for j in range(n):
            c = g.bilinear(q0[i], q0[j])
            if c:
                v = [a - c * b for a, b in zip(v, D[j])]
        Q.append(tuple(v))
    C = tuple(_orthogonal(g, Q + list(D)))
    T = TransitiveData(S, K, tuple(Q), D, C)
    try:
        T.frame_inv
    except SingularMetric:
        raise IsotropyFails("Q + im d + C does not span E") from None
    return T


# ---------------------------------------------------------------------------
# suitable connections


@dataclass(frozen=True, eq=False)
class SuitableConnection:
    """A metric connection preserving ``Q``, ``im d`` and ``C``.

    ``q_block[i]`` and ``c_block[i]`` are the Christoffel matrices of
    ``nabla^Q`` and ``nabla^C`` in the ``Q`` and ``C`` frames; the ``im d``
    block is ``-q_block[i]^T`` (dual to ``nabla^Q`` through ``g``).
    """

    data: TransitiveData
    q_block: tuple
    c_block: tuple
    nabla: MetricConnection

    def duality_residuals(self) -> list:
        """``X g(q, d f) - g(q, nabla_X d f) - g(nabla_X q, d f)`` on frame ``q`` and ``f = x^j``."""
        T = self.data
        B = T.bundle
        chart = T.chart
        out = []
        for k in range(chart.dim):
            X = VectorField.coordinate(chart, k)
            for q in T.Q:
                for d in T.D:
                    qs, ds = ESection(chart, q), ESection(chart, d)
                    res = (
                        X(B.pairing(qs, ds))
                        - B.pairing(qs, covariant_derivative(self.nabla, X, ds))
                        - B.pairing(covariant_derivative(self.nabla, X, qs), ds)
                    )
                    if res:
                        out.append(res)
        return out

    def splitting_residuals(self) -> list:
        """Components of ``nabla_{d_k} s`` leaving the summand of ``s``."""
        T = self.data
        chart = T.chart
        out = []
        for k in range(chart.dim):
            X = VectorField.coordinate(chart, k)
            for which, vecs in (("Q", T.Q), ("imd", T.D), ("C", T.C)):
                for v in vecs:
                    w = covariant_derivative(self.nabla, X, ESection(chart, v))
                    res = w - T.project(which, w)
                    if not res.is_zero():
                        out.append(res)
        return out

    def is_flat(self) -> bool:
        return self.nabla.is_flat()


def _blocks(mats, size: int, chart, what: str) -> tuple:
    if mats is None:
        return tuple(Matrix.zeros(size, size, chart.zero) for _ in range(chart.dim))
    if isinstance(mats, MetricConnection):
        mats = mats.christoffel
    out = tuple((m if isinstance(m, Matrix) else Matrix(m)).map(chart.scalar) for m in mats)
    if len(out) != chart.dim or any(m.shape != (size, size) for m in out if size) or (size == 0 and any(m.shape[0] for m in out)):
        raise InvalidComponentConnection(f"{what} block needs {chart.dim} matrices of size {size}x{size}")
    return out


def suitable_connection(T: TransitiveData, nablaQ=None, nablaC=None) -> SuitableConnection:
    """Assemble ``nabla^Q + nabla^{im d} + nabla^C`` and express it in the frame of ``E``.

    Defaults: ``nabla^Q`` has zero Christoffels in the ``Q`` frame and
    ``nabla^C`` is ``1/2 gC^-1 d gC``.
    """
    chart = T.chart
    n, r = T.n, T.rank
    c = r - 2 * n
    A = _blocks(nablaQ, n, chart, "Q")
    if c:
        if nablaC is None:
            gCinv = T.gC.inverse()
            half = chart.one / 2
            GC = tuple((gCinv @ T.gC.map(lambda v, i=i: v.diff(i))).scale(half) for i in range(chart.dim))
        else:
            GC = _blocks(nablaC, c, chart, "C")
        gC = T.gC
        for i, G in enumerate(GC):
            if not (gC.map(lambda v, i=i: v.diff(i)) - G.T @ gC - gC @ G).is_zero():
                raise InvalidComponentConnection(f"C block is not metric in direction {chart.coord_names[i]}")
    else:
        if nablaC is not None and any(_blocks(nablaC, 0, chart, "C")[i].shape[0] for i in range(chart.dim)):
            raise InvalidComponentConnection("there is no C summand")
        GC = tuple(Matrix([]) for _ in range(chart.dim))
    M, Minv = T.frame, T.frame_inv
    mats = []
    for i in range(chart.dim):
        blocks = [A[i], -A[i].T] + ([GC[i]] if c else [])
        adapted = Matrix.block_diag(blocks, chart.zero)
        dM = M.map(lambda v, i=i: v.diff(i))
        mats.append(M @ adapted @ Minv - dM @ Minv)
    try:
        nabla = MetricConnection(T.bundle, mats)
    except Exception as exc:
        raise InvalidComponentConnection(str(exc)) from None
    return SuitableConnection(T, A, GC, nabla)


def induced_linear_connection(N: SuitableConnection) -> tuple[Matrix, ...]:
    """Christoffels of ``D_X Y = rho(nabla_X sigma Y)``, indexed ``[i][k, j] = Gamma^k_ij``."""
    T = N.data
    chart = T.chart
    S = T.structure
    out = []
    for i in range(chart.dim):
        X = VectorField.coordinate(chart, i)
        cols = [S.anchor(covariant_derivative(N.nabla, X, ESection(chart, q))).components for q in T.Q]
        out.append(Matrix.from_columns(cols))
    return tuple(out)


# ---------------------------------------------------------------------------
# brackets


def b1_form(T: TransitiveData, N: SuitableConnection) -> EThreeForm:
    """``B1(e1,e2,e3) = sum_cycl g(sigma T(e1,e2), p_imd e3)``."""
    B = T.bundle
    rho = T.structure.rho

    def fn(e1, e2, e3):
        acc = T.chart.zero
        for a, b, c in ((e1, e2, e3), (e2, e3, e1), (e3, e1, e2)):
            tor = rho_torsion(N.nabla, rho, a, b)
            if not tor.is_zero():
                acc = acc + B.pairing(T.sigma_of(tor), T.project("imd", c))
        return acc

    return EThreeForm.from_function(B, fn)


def bracket1(T: TransitiveData, N: SuitableConnection) -> CourantStructure:
    """The pre-Courant bracket ``[,]_0 - beta_1`` of the splitting and the suitable connection."""
    S = bracket_with_beta(N.nabla, T.bundle, T.structure.rho, b1_form(T, N), name="bracket1")
    S.conditions["flat"] = lambda: [m for m in N.nabla.curvature.values() if not m.is_zero()]
    return S


def check_lambda(T: TransitiveData, Lam: EThreeForm) -> None:
    """``lambda`` must be ``K``-valued and vanish on ``im d``; raises :class:`InvalidLambda`."""
    S = T.structure
    if Lam.structure.rank != S.rank or Lam.structure.gE != S.gE:
        raise InvalidLambda("three-form belongs to a different bundle")
    frame = S.frame_sections
    chart = T.chart
    for a, b in combinations(range(S.rank), 2):
        v = S.anchor(Lam.lam(frame[a], frame[b]))
        if not v.is_zero():
            raise InvalidLambda(f"rho(lambda({S.labels[a]}, {S.labels[b]})) = {v} is not zero")
    for a in range(S.rank):
        for j in range(chart.dim):
            v = Lam.lam(frame[a], ESection(chart, T.D[j]))
            if not v.is_zero():
                raise InvalidLambda(f"lambda({S.labels[a]}, d{chart.coord_names[j]}) = {v!r} is not zero")


def general_bracket(T: TransitiveData, N: SuitableConnection, Lam: EThreeForm | None) -> CourantStructure:
    """``[,]_1 + lambda``."""
    S1 = bracket1(T, N)
    if Lam is None or Lam.is_zero():
        return S1
    check_lambda(T, Lam)
    br = S1.rule

    def rule(e1, e2):
        return br(e1, e2) + Lam.lam(e1, e2)

    return S1.with_rule(rule, "skew", name="bracket1+lambda")


# ---------------------------------------------------------------------------
# component conditions


def component_rhs(T: TransitiveData, N: SuitableConnection, kind: str, args: Sequence[ESection]) -> ESection:
    """Right-hand side of the cocycle condition split along ``Q`` and ``C`` arguments.

    ``kind`` is one of ``qqq``, ``qqc``, ``qcc``, ``ccc``.  For ``qcc`` the
    term ``d[g(q, gamma(c1, c2))]`` is read as ``d`` applied to the scalar,
    next to the bracket ``[q, gamma(c1, c2)]_1``.
    """
    S1 = bracket1(T, N)
    B = T.bundle
    rho = T.structure.rho
    chart = T.chart
    gam = lambda a, b: gamma_op(N.nabla, B, rho, a, b)
    if kind == "qqq":
        return ESection.zero(chart, T.rank)
    if kind == "qqc":
        q1, q2, c = args
        return -curvature_on(N.nabla, S1.anchor(q1), S1.anchor(q2), c)
    if kind == "qcc":
        q, c1, c2 = args
        X = S1.anchor(q)
        g12 = gam(c1, c2)
        return (
            S1.partial(B.pairing(q, g12))
            + S1.rule(q, g12)
            - gam(covariant_derivative(N.nabla, X, c1), c2)
            - gam(c1, covariant_derivative(N.nabla, X, c2))
        )
    if kind == "ccc":
        c1, c2, c3 = args
        acc = ESection.zero(chart, T.rank)
        for a, b, c in ((c1, c2, c3), (c2, c3, c1), (c3, c1, c2)):
            acc = acc + S1.rule(a, gam(b, c))
        return acc
    raise ValueError(f"unknown component kind {kind!r}")


def _component_args(T: TransitiveData, spec: SampleSpec):
    rng = make_rng(spec.seed)
    n, c = T.n, T.rank - 2 * T.n

    def q():
        return T.q_section([random_polynomial(T.chart, rng, spec.degree) for _ in range(n)])

    def cc():
        return T.c_section([random_polynomial(T.chart, rng, spec.degree) for _ in range(c)])

    out = {"qqq": [], "qqc": [], "qcc": [], "ccc": []}
    for _ in range(spec.trials):
        out["qqq"].append((q(), q(), q()))
        if c:
            out["qqc"].append((q(), q(), cc()))
            out["qcc"].append((q(), cc(), cc()))
            out["ccc"].append((cc(), cc(), cc()))
    return out


def component_conditions(
    T: TransitiveData,
    N: SuitableConnection,
    Lam: EThreeForm | None,
    args: dict | None = None,
    spec: SampleSpec | None = None,
) -> dict[str, list[ESection]]:
    """Nonzero residuals of ``(d_[] Lambda)(args) - RHS`` for each argument type.

    ``args`` maps ``qqq``/``qqc``/``qcc``/``ccc`` to lists of triples; when
    omitted, random ``Q`` and ``C`` sections are drawn.  Argument types that
    need a ``C`` summand are empty in minimal rank.
    """
    if Lam is not None and not Lam.is_zero():
        check_lambda(T, Lam)
    S1 = bracket1(T, N)
    if args is None:
        args = _component_args(T, spec or SampleSpec(trials=3, degree=1))
    out: dict[str, list] = {}
    for kind in ("qqq", "qqc", "qcc", "ccc"):
        res = []
        for trip in args.get(kind, []):
            lhs = lambda_differential(S1, Lam, *trip) if Lam is not None else ESection.zero(T.chart, T.rank)
            r = lhs - component_rhs(T, N, kind, trip)
            if not r.is_zero():
                res.append(r)
        out[kind] = res
    return out


# ---------------------------------------------------------------------------
# restricted transitive algebroids


def restricted_check(
    T: TransitiveData,
    N: SuitableConnection,
    Lam: EThreeForm | None,
    spec: SampleSpec | None = None,
) -> Report:
    """Conditions for ``[,]_1 + lambda`` to be a restricted transitive Courant algebroid.

    Reported under suite ``restricted``; the ``C`` conditions are skipped in
    minimal rank ``r = 2n``.
    """
    if Lam is not None and not Lam.is_zero():
        check_lambda(T, Lam)
    spec = spec or SampleSpec(trials=3, degree=1)
    chart = T.chart
    S = general_bracket(T, N, Lam)
    B = T.bundle
    rho = T.structure.rho
    zero_sec = ESection.zero(chart, T.rank)
    lam = (lambda a, b: Lam.lam(a, b)) if Lam is not None else (lambda a, b: zero_sec)
    Lval = (lambda a, b, c: Lam(a, b, c)) if Lam is not None else (lambda a, b, c: chart.zero)
    minimal = T.rank == 2 * T.n
    Qf = [ESection(chart, q) for q in T.Q]
    Cf = [ESection(chart, c) for c in T.C]
    nQ = [f"q{i + 1}" for i in range(len(Qf))]
    nC = [f"c{i + 1}" for i in range(len(Cf))]
    rep = Report()

    def first(items):
        for wit, v in items:
            if not _zero(v):
                return v, f"({wit}): {format_value(v, T.structure.labels)}"
        return zero_sec, None

    # membership conditions on frame pairs
    items = [((f"{nQ[i]}, {nQ[j]}"), lam(Qf[i], Qf[j]) - T.project("imd", lam(Qf[i], Qf[j]))) for i, j in combinations(range(len(Qf)), 2)]
    rep.add("restricted", "lambda(q,q) in im d", *first(items))
    if not minimal:
        items = [(f"{nC[a]}, {nQ[i]}", lam(Cf[a], Qf[i])) for a in range(len(Cf)) for i in range(len(Qf))]
        rep.add("restricted", "lambda(c,q) = 0", *first(items))
        items = [(f"{nC[a]}, {nC[b]}", lam(Cf[a], Cf[b]) - T.project("C", lam(Cf[a], Cf[b]))) for a, b in combinations(range(len(Cf)), 2)]
        rep.add("restricted", "lambda(c,c) in C", *first(items))
        flat = [m for m in _c_curvature(N) if not m.is_zero()]
        rep.add("restricted", "C connection flat", flat, "curvature" if flat else None)

    br1 = bracket1(T, N).rule
    samples = _component_args(T, spec)

    def cocycle_q(q1, q2, q3):
        acc = S.partial(Lval(q1, q2, q3))
        for a, b, c in ((q1, q2, q3), (q2, q3, q1), (q3, q1, q2)):
            s = T.sigma_of(lie_bracket(S.anchor(a), S.anchor(b)))
            acc = acc - (lam(s, c) - br1(c, lam(a, b)))
        return acc

    trip = list(combinations(range(len(Qf)), 3))
    items = [(", ".join(nQ[i] for i in t), cocycle_q(*(Qf[i] for i in t))) for t in trip]
    items += [(f"trial {k}", cocycle_q(*qs)) for k, qs in enumerate(samples["qqq"])]
    rep.add("restricted", "cocycle on Q", *first(items))
    if not minimal:
        gam = lambda a, b: gamma_op(N.nabla, B, rho, a, b)

        def cocycle_c(c1, c2, c3):
            acc = S.partial(Lval(c1, c2, c3))
            for a, b, c in ((c1, c2, c3), (c2, c3, c1), (c3, c1, c2)):
                acc = acc + gam(lam(a, b), c)
            return acc

        def c_parallel(q, c1, c2):
            X = S.anchor(q)
            nab = lambda e: covariant_derivative(N.nabla, X, e)
            return nab(lam(c1, c2)) - lam(nab(c1), c2) - lam(c1, nab(c2))

        items = [(", ".join(nC[i] for i in t), cocycle_c(*(Cf[i] for i in t))) for t in combinations(range(len(Cf)), 3)]
        items += [(f"trial {k}", cocycle_c(*cs)) for k, cs in enumerate(samples["ccc"])]
        rep.add("restricted", "cocycle on C", *first(items))
        items = [(f"{nQ[i]}, {nC[a]}, {nC[b]}", c_parallel(Qf[i], Cf[a], Cf[b])) for i in range(len(Qf)) for a, b in combinations(range(len(Cf)), 2)]
        items += [(f"trial {k}", c_parallel(*t)) for k, t in enumerate(samples["qcc"])]
        rep.add("restricted", "lambda(c,c) parallel", *first(items))
    return rep.sorted()


def _zero(v) -> bool:
    from .core import is_zero

    return is_zero(v)


def _c_curvature(N: SuitableConnection) -> list[Matrix]:
    G = N.c_block
    chart = N.data.chart
    out = []
    for i, j in combinations(range(chart.dim), 2):
        out.append(G[j].map(lambda v: v.diff(i)) - G[i].map(lambda v: v.diff(j)) + G[i] @ G[j] - G[j] @ G[i])
    return out


# ---------------------------------------------------------------------------
# TM + T*M + TM with a Riemannian metric


def triple_lambda(S: CourantStructure, G: MetricOnTM, phi) -> EThreeForm:
    """``Lambda = Phi(X1,X2,Y3) + Phi(X1,Y2,X3) + Phi(Y1,X2,X3)`` on ``TM + T*M + TM``."""
    chart = S.chart
    n = chart.dim

    def parts(e):
        return VectorField(chart, e.components[:n]), VectorField(chart, e.components[2 * n :])

    def fn(e1, e2, e3):
        (X1, Y1), (X2, Y2), (X3, Y3) = parts(e1), parts(e2), parts(e3)
        return phi(X1, X2, Y3) + phi(X1, Y2, X3) + phi(Y1, X2, X3)

    return EThreeForm.from_function(S, fn)


def riemannian_triple_data(G: MetricOnTM, twist=None):
    """``(structure, data, connection, Lambda)`` for ``TM + T*M + TM`` with metric ``g + G``.

    The suitable connection uses the Levi-Civita connection of ``G`` on the
    ``C = TM`` summand; ``Lambda`` is ``None`` without a twist.
    """
    chart = G.chart
    n = chart.dim
    zero, one, half = chart.zero, chart.one, chart.one / 2
    gE = [[zero] * (3 * n) for _ in range(3 * n)]
    for i in range(n):
        gE[i][n + i] = gE[n + i][i] = half
        for j in range(n):
            gE[2 * n + i][2 * n + j] = G.matrix[i, j]
    rho = [[one if j == i else zero for j in range(3 * n)] for i in range(n)]
    labels = [f"d/d{c}" for c in chart.coord_names] + [f"d{c}" for c in chart.coord_names] + [f"Y{c}" for c in chart.coord_names]
    base = CourantStructure(chart, gE, rho, lambda a, b: ESection.zero(chart, 3 * n), "skew", labels, "triple-base")
    T = decompose(base)
    N = suitable_connection(T, nablaC=levi_civita(G))
    Lam = None
    if twist is not None:
        Lam = triple_lambda(T.bundle, G, twist.phi)
    S = general_bracket(T, N, Lam)
    S.name = "triple" if Lam is None else "triple+lambda"
    return S, T, N, Lam

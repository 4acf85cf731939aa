"""Courant structures on a trivial bundle over a chart, and the axiom verifier.

A :class:`CourantStructure` bundles a fiber metric ``gE`` (r x r), an anchor
``rho`` (n x r) and a rule on section pairs that is either a skew bracket or a
non-skew product.  The verifier never asks for a yes/no answer from the rule;
it computes exact residuals of every identity on sampled sections, and the
report carries the first nonzero residual as a witness.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from functools import cached_property
from itertools import combinations
from typing import Callable, Iterable, Mapping, Sequence

from .calculus import DifferentialForm, VectorField, lie_bracket
from .errors import ChartMismatch, FlavorMismatch, LambdaNotAnchorKilling, ShapeMismatch, SingularMetric
from .linalg import Matrix
from .scalars import Chart, RationalScalar

__all__ = [
    "ESection",
    "EThreeForm",
    "CourantStructure",
    "Report",
    "ReportLine",
    "SampleSpec",
    "SUITES",
    "convert",
    "partial_operator",
    "verify",
    "obstructions",
    "product_symmetry_residual",
    "jacobiator_leibniz_residual",
    "modify_with_lambda",
    "cocycle_defect",
    "is_zero",
    "format_value",
]


class ESection:
    """A section of the trivial rank-r bundle, by components in the frame."""

    __slots__ = ("chart", "components")

    def __init__(self, chart: Chart, components: Iterable):
        self.chart = chart
        self.components = chart.scalars(components)

    @classmethod
    def zero(cls, chart: Chart, rank: int) -> "ESection":
        return cls(chart, [chart.zero] * rank)

    @classmethod
    def basis(cls, chart: Chart, rank: int, a: int) -> "ESection":
        return cls(chart, [chart.one if b == a else chart.zero for b in range(rank)])

    @property
    def rank(self) -> int:
        return len(self.components)

    def __getitem__(self, a: int) -> RationalScalar:
        return self.components[a]

    def __iter__(self):
        return iter(self.components)

    def __len__(self) -> int:
        return len(self.components)

    def _check(self, other: "ESection") -> None:
        if other.chart != self.chart:
            raise ChartMismatch("sections over different charts")
        if len(other.components) != len(self.components):
            raise ShapeMismatch(f"sections of rank {self.rank} and {other.rank}")

    def __add__(self, other: "ESection") -> "ESection":
        self._check(other)
        return ESection(self.chart, [a + b for a, b in zip(self.components, other.components)])

    def __sub__(self, other: "ESection") -> "ESection":
        self._check(other)
        return ESection(self.chart, [a - b for a, b in zip(self.components, other.components)])

    def __neg__(self) -> "ESection":
        return ESection(self.chart, [-a for a in self.components])

    def __mul__(self, f) -> "ESection":
        f = self.chart.scalar(f)
        return ESection(self.chart, [f * a for a in self.components])

    __rmul__ = __mul__

    def __eq__(self, other) -> bool:
        return isinstance(other, ESection) and other.chart == self.chart and other.components == self.components

    def __hash__(self) -> int:
        return hash(self.components)

    def is_zero(self) -> bool:
        return not any(self.components)

    def __repr__(self) -> str:
        return f"ESection({', '.join(str(c) for c in self.components)})"


Rule = Callable[[ESection, ESection], ESection]


class CourantStructure:
    """``(E, gE, rho, rule)`` with ``rule`` a skew bracket or a product.

    ``conditions`` holds named extra residual checks contributed by the
    constructor (flatness of a connection, a torsion condition, ...).  Each
    value is a zero-argument callable returning a residual.
    """

    def __init__(
        self,
        chart: Chart,
        gE,
        rho,
        rule: Rule,
        flavor: str,
        labels: Sequence[str] | None = None,
        name: str = "",
        conditions: Mapping[str, Callable[[], object]] | None = None,
    ):
        if flavor not in ("skew", "product"):
            raise ValueError(f"flavor must be 'skew' or 'product', not {flavor!r}")
        gE = gE if isinstance(gE, Matrix) else Matrix(gE)
        rho = rho if isinstance(rho, Matrix) else Matrix(rho)
        gE = gE.map(chart.scalar)
        rho = rho.map(chart.scalar)
        r = gE.shape[0]
        if gE.shape != (r, r) or not gE.is_symmetric():
            raise ShapeMismatch("fiber metric must be a symmetric square matrix")
        if rho.shape != (chart.dim, r):
            raise ShapeMismatch(f"anchor must be {chart.dim}x{r}, got {rho.shape}")
        self.chart = chart
        self.rank = r
        self.gE = gE
        self.rho = rho
        self.rule = rule
        self.flavor = flavor
        self.labels = tuple(labels) if labels else tuple(f"e{a + 1}" for a in range(r))
        if len(self.labels) != r:
            raise ShapeMismatch("one label per frame vector")
        self.name = name
        self.conditions = dict(conditions or {})

    def __repr__(self) -> str:
        return f"CourantStructure({self.name or '?'}, rank={self.rank}, flavor={self.flavor})"

    @cached_property
    def gE_inv(self) -> Matrix:
        try:
            return self.gE.inverse()
        except SingularMetric:
            raise SingularMetric("fiber metric is degenerate") from None

    # sections -------------------------------------------------------------------
    def section(self, components: Iterable) -> ESection:
        e = ESection(self.chart, components)
        if e.rank != self.rank:
            raise ShapeMismatch(f"section of rank {e.rank} for a rank-{self.rank} bundle")
        return e

    def frame(self, a: int) -> ESection:
        return ESection.basis(self.chart, self.rank, a)

    @property
    def frame_sections(self) -> list[ESection]:
        return [self.frame(a) for a in range(self.rank)]

    def zero_section(self) -> ESection:
        return ESection.zero(self.chart, self.rank)

    # structure maps -------------------------------------------------------------
    def pairing(self, e1: ESection, e2: ESection) -> RationalScalar:
        return self.gE.bilinear(e1.components, e2.components)

    def anchor(self, e: ESection) -> VectorField:
        return VectorField(self.chart, self.rho.apply(e.components))

    @cached_property
    def _half_partial(self) -> Matrix:
        # columns: d(x^j) -> 1/2 gE^-1 rho^T dx^j
        return (self.gE_inv @ self.rho.T).scale(self.chart.scalar(1) / 2)

    def partial(self, f) -> ESection:
        """``d f = 1/2 gE^-1 rho^T (df)``."""
        f = self.chart.scalar(f)
        df = [f.diff(i) for i in range(self.chart.dim)]
        return ESection(self.chart, self._half_partial.apply(df))

    def partial_of_form(self, alpha: DifferentialForm) -> ESection:
        return ESection(self.chart, self._half_partial.apply(alpha.dense))

    def __call__(self, e1: ESection, e2: ESection) -> ESection:
        return self.rule(e1, e2)

    def anchor_isotropy_residual(self) -> Matrix:
        """``rho gE^-1 rho^T``; zero iff the image of the partial operator is isotropic."""
        return self.rho @ self.gE_inv @ self.rho.T

    def with_rule(self, rule: Rule, flavor: str | None = None, name: str | None = None, conditions=None) -> "CourantStructure":
        return CourantStructure(
            self.chart,
            self.gE,
            self.rho,
            rule,
            flavor or self.flavor,
            self.labels,
            self.name if name is None else name,
            self.conditions if conditions is None else conditions,
        )

    # both views of the rule -------------------------------------------------------
    def bracket(self, e1: ESection, e2: ESection) -> ESection:
        """Skew bracket, converting from the product when needed."""
        if self.flavor == "skew":
            return self.rule(e1, e2)
        return (self.rule(e1, e2) - self.rule(e2, e1)) * (self.chart.one / 2)

    def product(self, e1: ESection, e2: ESection) -> ESection:
        """Non-skew product, converting from the bracket when needed."""
        if self.flavor == "product":
            return self.rule(e1, e2)
        return self.rule(e1, e2) + self.partial(self.pairing(e1, e2))


def partial_operator(S: CourantStructure, f) -> ESection:
    return S.partial(f)


def convert(S: CourantStructure, direction: str) -> CourantStructure:
    """``skew->product`` (add the partial of the pairing) or ``product->skew`` (skew part)."""
    if direction in ("skew->product", "product"):
        if S.flavor == "product":
            return S
        return S.with_rule(S.product, "product")
    if direction in ("product->skew", "skew"):
        if S.flavor == "skew":
            return S
        return S.with_rule(S.bracket, "skew")
    raise ValueError(f"unknown conversion {direction!r}")


# ---------------------------------------------------------------------------
# totally skew 3-forms on E


class EThreeForm:
    """Totally skew trilinear form on E, stored on frame triples ``a < b < c``."""

    __slots__ = ("structure", "_terms", "__dict__")

    def __init__(self, S: CourantStructure, components: Mapping[tuple[int, int, int], object] | None = None):
        from .calculus import _sort_sign

        terms: dict[tuple[int, int, int], RationalScalar] = {}
        for idx, v in (components or {}).items():
            if any(not 0 <= a < S.rank for a in idx):
                raise ShapeMismatch(f"frame index out of range in {idx}")
            sign, key = _sort_sign(tuple(idx))
            if not sign:
                continue
            v = S.chart.scalar(v)
            v = v if sign > 0 else -v
            terms[key] = terms[key] + v if key in terms else v
        self.structure = S
        self._terms = {k: v for k, v in terms.items() if v}

    @classmethod
    def from_function(cls, S: CourantStructure, fn: Callable[[ESection, ESection, ESection], RationalScalar]) -> "EThreeForm":
        """Components of a trilinear ``fn`` read off on frame triples."""
        frame = S.frame_sections
        return cls(S, {(a, b, c): fn(frame[a], frame[b], frame[c]) for a, b, c in combinations(range(S.rank), 3)})

    @classmethod
    def zero(cls, S: CourantStructure) -> "EThreeForm":
        return cls(S, {})

    def items(self):
        return sorted(self._terms.items())

    def is_zero(self) -> bool:
        return not self._terms

    def __call__(self, e1: ESection, e2: ESection, e3: ESection) -> RationalScalar:
        acc = self.structure.chart.zero
        for (a, b, c), v in self._terms.items():
            det = (
                e1[a] * (e2[b] * e3[c] - e2[c] * e3[b])
                - e1[b] * (e2[a] * e3[c] - e2[c] * e3[a])
                + e1[c] * (e2[a] * e3[b] - e2[b] * e3[a])
            )
            if det:
                acc = acc + v * det
        return acc

    @cached_property
    def _by_slot(self) -> list[list[tuple[int, int, RationalScalar]]]:
        # for each k: entries (a, b, coeff) with Lambda(e_a, e_b, e_k) = coeff, a<b
        out: list[list] = [[] for _ in range(self.structure.rank)]
        for (a, b, c), v in self._terms.items():
            out[c].append((a, b, v))
            out[b].append((a, c, -v))
            out[a].append((b, c, v))
        return out

    def lam(self, e1: ESection, e2: ESection) -> ESection:
        """``lambda(e1, e2)`` with ``g(lambda(e1, e2), e3) = Lambda(e1, e2, e3)``."""
        S = self.structure
        vec = []
        for entries in self._by_slot:
            acc = S.chart.zero
            for a, b, v in entries:
                m = e1[a] * e2[b] - e1[b] * e2[a]
                if m:
                    acc = acc + v * m
            vec.append(acc)
        return ESection(S.chart, S.gE_inv.apply(vec))

    def __add__(self, other: "EThreeForm") -> "EThreeForm":
        terms = dict(self._terms)
        for k, v in other._terms.items():
            terms[k] = terms[k] + v if k in terms else v
        return EThreeForm(self.structure, terms)

    def __neg__(self) -> "EThreeForm":
        return EThreeForm(self.structure, {k: -v for k, v in self._terms.items()})

    def __mul__(self, f) -> "EThreeForm":
        f = self.structure.chart.scalar(f)
        return EThreeForm(self.structure, {k: f * v for k, v in self._terms.items()})

    __rmul__ = __mul__

    def __repr__(self) -> str:
        L = self.structure.labels
        body = ", ".join(f"{L[a]}^{L[b]}^{L[c]}: {v}" for (a, b, c), v in self.items())
        return f"EThreeForm({body})"


def skew_residual(fn: Callable[[ESection, ESection, ESection], RationalScalar], e1, e2, e3) -> list[RationalScalar]:
    """Residuals of total skew-symmetry of a trilinear map at one triple."""
    base = fn(e1, e2, e3)
    return [
        base + fn(e2, e1, e3),
        base + fn(e1, e3, e2),
        base + fn(e3, e2, e1),
    ]


# ---------------------------------------------------------------------------
# reports


def is_zero(x) -> bool:
    if isinstance(x, (list, tuple)):
        return all(is_zero(v) for v in x)
    if isinstance(x, RationalScalar):
        return not x
    if hasattr(x, "is_zero"):
        return x.is_zero()
    return not x


def format_value(x, labels: Sequence[str] | None = None, coord_names: Sequence[str] | None = None) -> str:
    """Canonical text of a residual; only nonzero components are printed."""
    if isinstance(x, ESection):
        labels = labels or [f"e{a + 1}" for a in range(x.rank)]
        parts = [f"{labels[a]}={c}" for a, c in enumerate(x.components) if c]
        return "(" + ", ".join(parts) + ")" if parts else "0"
    if isinstance(x, Matrix):
        parts = [f"[{i},{j}]={x[i, j]}" for i in range(x.shape[0]) for j in range(x.shape[1]) if x[i, j]]
        return "(" + ", ".join(parts) + ")" if parts else "0"
    if isinstance(x, (list, tuple)):
        return "[" + "; ".join(format_value(v, labels) for v in x) + "]"
    return str(x)


@dataclass(frozen=True)
class ReportLine:
    suite: str
    identity: str
    passed: bool
    witness: str = ""

    def __str__(self) -> str:
        s = f"{self.suite}/{self.identity} {'PASS' if self.passed else 'FAIL'}"
        if not self.passed:
            s += f" [witness: {self.witness}]"
        return s


@dataclass
class Report:
    lines: list[ReportLine] = field(default_factory=list)
    residuals: dict[tuple[str, str], object] = field(default_factory=dict)

    def add(self, suite: str, identity: str, residual, witness: str | None = None, note: str = "") -> None:
        ok = is_zero(residual)
        if ok:
            w = ""
        else:
            w = witness if witness is not None else str(residual)
            if note:
                w = f"{note}: {w}"
        self.lines.append(ReportLine(suite, identity, ok, w))
        self.residuals[(suite, identity)] = residual

    def extend(self, other: "Report") -> None:
        self.lines.extend(other.lines)
        self.residuals.update(other.residuals)

    def sorted(self) -> "Report":
        return Report(sorted(self.lines, key=lambda l: (l.suite, l.identity)), dict(self.residuals))

    @property
    def passed(self) -> bool:
        return all(l.passed for l in self.lines)

    @property
    def exit_code(self) -> int:
        return 0 if self.passed else 1

    def status(self, suite: str, identity: str) -> bool:
        for l in self.lines:
            if l.suite == suite and l.identity == identity:
                return l.passed
        raise KeyError(f"{suite}/{identity}")

    def failing(self) -> list[str]:
        return [f"{l.suite}/{l.identity}" for l in self.lines if not l.passed]

    def __str__(self) -> str:
        return "\n".join(str(l) for l in self.lines)


# ---------------------------------------------------------------------------
# verification


@dataclass(frozen=True)
class SampleSpec:
    """Deterministic random sampling of test sections and functions."""

    seed: int = 1
    degree: int = 2
    trials: int = 10


# suite -> ordered identity names
SUITES: dict[str, tuple[str, ...]] = {
    "def11": ("axiom1", "axiom2", "axiom3"),
    "prop12": ("a", "b", "c1", "c2", "d", "e"),
    "skew_i_v": ("i", "ii", "iv", "v", "bracket_partial"),
    "jacobi_iii": ("iii",),
}


def _samples(S: CourantStructure, sections, spec: SampleSpec | None):
    from .sampling import random_polynomial, random_sections, make_rng

    if sections is None:
        spec = spec or SampleSpec()
        rng = make_rng(spec.seed)
        secs = random_sections(S.chart, S.rank, 3 * spec.trials, spec.degree, rng=rng)
        funcs = [random_polynomial(S.chart, rng, spec.degree) for _ in range(spec.trials)]
    else:
        secs = list(sections)
        if len(secs) % 3:
            raise ShapeMismatch("explicit sections must come in triples")
        spec = spec or SampleSpec()
        rng = make_rng(spec.seed)
        funcs = [random_polynomial(S.chart, rng, spec.degree) for _ in range(len(secs) // 3)]
    triples = [(secs[3 * t], secs[3 * t + 1], secs[3 * t + 2]) for t in range(len(secs) // 3)]
    return triples, funcs


def _identities(S: CourantStructure) -> dict[tuple[str, str], Callable]:
    """Identity name -> residual function of (e1, e2, e3, f)."""
    P = convert(S, "skew->product")
    B = convert(S, "product->skew")
    prod, br = P.rule, B.rule
    g, rho, d = S.pairing, S.anchor, S.partial
    half = S.chart.one / 2
    third = S.chart.one / 3

    def axiom1(e, e1, e2, f):
        return rho(e)(g(e1, e2)) - g(prod(e, e1), e2) - g(e1, prod(e, e2))

    def axiom2(e, e1, e2, f):
        return prod(e, e) - d(g(e, e))

    def axiom3(e1, e2, e3, f):
        return prod(e1, prod(e2, e3)) - prod(prod(e1, e2), e3) - prod(e2, prod(e1, e3))

    def a(e1, e2, e3, f):
        return prod(e1, f * e2) - f * prod(e1, e2) - rho(e1)(f) * e2

    def b(e1, e2, e3, f):
        return prod(f * e1, e2) - f * prod(e1, e2) + rho(e2)(f) * e1 - (2 * g(e1, e2)) * d(f)

    def c1(e1, e2, e3, f):
        return prod(d(f), e1)

    def c2(e1, e2, e3, f):
        return prod(e1, d(f)) - d(rho(e1)(f))

    def dd(e1, e2, e3, f):
        return rho(prod(e1, e2)) - lie_bracket(rho(e1), rho(e2))

    def e(e1, e2, e3, f):
        return rho(d(f))

    def i(e1, e2, e3, f):
        return rho(br(e1, e2)) - lie_bracket(rho(e1), rho(e2))

    def ii(e1, e2, e3, f):
        return S.anchor_isotropy_residual()

    def iv(e1, e2, e3, f):
        return br(e1, f * e2) - f * br(e1, e2) - rho(e1)(f) * e2 + g(e1, e2) * d(f)

    def v(e, e1, e2, f):
        return rho(e)(g(e1, e2)) - g(br(e, e1) + d(g(e, e1)), e2) - g(e1, br(e, e2) + d(g(e, e2)))

    def cpt(e1, e2, e3, f):
        return br(e1, d(f)) - d(rho(e1)(f)) * half

    def iii(e1, e2, e3, f):
        b12, b23, b31 = br(e1, e2), br(e2, e3), br(e3, e1)
        J = br(b12, e3) + br(b23, e1) + br(b31, e2)
        return J - d(g(b12, e3) + g(b23, e1) + g(b31, e2)) * third

    return {
        ("def11", "axiom1"): axiom1,
        ("def11", "axiom2"): axiom2,
        ("def11", "axiom3"): axiom3,
        ("prop12", "a"): a,
        ("prop12", "b"): b,
        ("prop12", "c1"): c1,
        ("prop12", "c2"): c2,
        ("prop12", "d"): dd,
        ("prop12", "e"): e,
        ("skew_i_v", "i"): i,
        ("skew_i_v", "ii"): ii,
        ("skew_i_v", "iv"): iv,
        ("skew_i_v", "v"): v,
        ("skew_i_v", "bracket_partial"): cpt,
        ("jacobi_iii", "iii"): iii,
    }


_FRAME_SEARCH_LIMIT = 250


def _frame_witness(S, fn) -> tuple[object, str] | None:
    # random sections give huge witnesses; a failing frame triple is easier to read
    frame = S.frame_sections
    coords = S.chart.coords
    count = 0
    for a in range(S.rank):
        for b in range(S.rank):
            for c in range(S.rank):
                for f in coords:
                    count += 1
                    if count > _FRAME_SEARCH_LIMIT:
                        return None
                    res = fn(frame[a], frame[b], frame[c], f)
                    if not is_zero(res):
                        L = S.labels
                        return res, f"({L[a]}, {L[b]}, {L[c]}; f={f}): {format_value(res, S.labels)}"
    return None


def _check_one(S, key, fn, triples, funcs) -> tuple[tuple[str, str], object, str]:
    once = key[1] == "ii"
    for t, ((e1, e2, e3), f) in enumerate(zip(triples, funcs)):
        res = fn(e1, e2, e3, f)
        if not is_zero(res):
            if not once:
                short = _frame_witness(S, fn)
                if short is not None:
                    return key, short[0], short[1]
            return key, res, f"trial {t}: {format_value(res, S.labels)}"
        if once:
            break
    zero = S.chart.zero
    return key, zero, ""


def verify(
    S: CourantStructure,
    suite: str | Sequence[str] = "all",
    sections: Sequence[ESection] | None = None,
    spec: SampleSpec | None = None,
    identities: Iterable[str] | None = None,
    jobs: int = 1,
    strict_flavor: bool = False,
    conditions: bool = True,
) -> Report:
    """Run identity suites; ``sections`` (triples) override random sampling.

    ``suite`` is one of ``def11``, ``prop12``, ``skew_i_v``, ``jacobi_iii`` or
    ``all`` (a list selects several).  The rule is converted to the flavor each
    suite needs unless ``strict_flavor`` is set, in which case a mismatch
    raises :class:`FlavorMismatch`.  ``identities`` filters by identity name.
    Extra ``S.conditions`` are reported under the ``conditions`` suite.
    """
    names = list(SUITES) if suite == "all" else ([suite] if isinstance(suite, str) else list(suite))
    for name in names:
        if name not in SUITES:
            raise ValueError(f"unknown suite {name!r}")
        if strict_flavor:
            need = "product" if name in ("def11", "prop12") else "skew"
            if S.flavor != need:
                raise FlavorMismatch(f"suite {name} needs a {need} rule, structure is {S.flavor}")
    triples, funcs = _samples(S, sections, spec)
    table = _identities(S)
    wanted = set(identities) if identities else None
    todo = [
        (key, fn)
        for key, fn in table.items()
        if key[0] in names and (wanted is None or key[1] in wanted or f"{key[0]}/{key[1]}" in wanted)
    ]
    if jobs > 1:
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            results = list(pool.map(lambda kf: _check_one(S, kf[0], kf[1], triples, funcs), todo))
    else:
        results = [_check_one(S, key, fn, triples, funcs) for key, fn in todo]
    report = Report()
    for (sname, ident), res, witness in results:
        report.add(sname, ident, res, witness)
    if conditions:
        for cname, check in S.conditions.items():
            if wanted is not None and cname not in wanted and f"conditions/{cname}" not in wanted:
                continue
            res = check()
            report.add("conditions", cname, res, format_value(res, S.labels))
    return report.sorted()


# ---------------------------------------------------------------------------
# obstructions


def obstructions(S: CourantStructure, e1: ESection, e2: ESection, e3: ESection) -> tuple[ESection, ESection, ESection]:
    """``(L, J, C)``: Leibniz defect of the product, jacobiator and its corrected form."""
    prod = convert(S, "skew->product").rule
    br = convert(S, "product->skew").rule
    L = prod(e1, prod(e2, e3)) - prod(prod(e1, e2), e3) - prod(e2, prod(e1, e3))
    b12, b23, b31 = br(e1, e2), br(e2, e3), br(e3, e1)
    J = br(b12, e3) + br(b23, e1) + br(b31, e2)
    C = J - S.partial(S.pairing(b12, e3) + S.pairing(b23, e1) + S.pairing(b31, e2)) * (S.chart.one / 3)
    return L, J, C


def _L(prod, e1, e2, e3):
    return prod(e1, prod(e2, e3)) - prod(prod(e1, e2), e3) - prod(e2, prod(e1, e3))


def product_symmetry_residual(S: CourantStructure, e1: ESection, e2: ESection, e: ESection) -> ESection:
    """``L(e1,e2,e) + L(e2,e1,e) + 2 (d g(e1,e2)) * e``; zero whenever axiom 2 holds."""
    prod = convert(S, "skew->product").rule
    return _L(prod, e1, e2, e) + _L(prod, e2, e1, e) + prod(S.partial(S.pairing(e1, e2)), e) * 2


def jacobiator_leibniz_residual(S: CourantStructure, e1: ESection, e2: ESection, e3: ESection) -> ESection:
    """``6 J - sum_cycl {L(1,2,3) - L(2,1,3) + 2 d g(e1, [e2, e3])}``."""
    prod = convert(S, "skew->product").rule
    br = convert(S, "product->skew").rule
    _, J, _ = obstructions(S, e1, e2, e3)
    acc = J * 6
    for a, b, c in ((e1, e2, e3), (e2, e3, e1), (e3, e1, e2)):
        acc = acc - (_L(prod, a, b, c) - _L(prod, b, a, c) + S.partial(S.pairing(a, br(b, c))) * 2)
    return acc


# ---------------------------------------------------------------------------
# lambda modifications


def lambda_anchor_residuals(S: CourantStructure, Lam: EThreeForm) -> list[tuple[int, int, VectorField]]:
    """Nonzero ``rho(lambda(e_a, e_b))`` on frame pairs."""
    frame = S.frame_sections
    out = []
    for a, b in combinations(range(S.rank), 2):
        v = S.anchor(Lam.lam(frame[a], frame[b]))
        if not v.is_zero():
            out.append((a, b, v))
    return out


def _check_lambda(S: CourantStructure, Lam: EThreeForm) -> None:
    if Lam.structure.rank != S.rank or Lam.structure.gE != S.gE:
        raise ShapeMismatch("three-form belongs to a different bundle")
    bad = lambda_anchor_residuals(S, Lam)
    if bad:
        a, b, v = bad[0]
        raise LambdaNotAnchorKilling(
            f"rho(lambda({S.labels[a]}, {S.labels[b]})) = {v} is not zero"
        )


def modify_with_lambda(S: CourantStructure, Lam: EThreeForm) -> CourantStructure:
    """The bracket ``[e1, e2] + lambda(e1, e2)``."""
    B = convert(S, "product->skew")
    _check_lambda(S, Lam)
    if Lam.is_zero():
        return B
    br = B.rule

    def rule(e1: ESection, e2: ESection) -> ESection:
        return br(e1, e2) + Lam.lam(e1, e2)

    return B.with_rule(rule, "skew", name=(S.name + "+lambda") if S.name else "lambda")


def lambda_differential(S: CourantStructure, Lam: EThreeForm, e1: ESection, e2: ESection, e3: ESection) -> ESection:
    """``d Lambda(e1,e2,e3) - sum_cycl {lambda(lambda(e1,e2),e3) + lambda([e1,e2],e3) + [lambda(e1,e2),e3]}``."""
    br = convert(S, "product->skew").rule
    acc = S.partial(Lam(e1, e2, e3))
    for a, b, c in ((e1, e2, e3), (e2, e3, e1), (e3, e1, e2)):
        lab = Lam.lam(a, b)
        acc = acc - (Lam.lam(lab, c) + Lam.lam(br(a, b), c) + br(lab, c))
    return acc


def cocycle_defect(S: CourantStructure, Lam: EThreeForm, e1: ESection, e2: ESection, e3: ESection) -> ESection:
    """Defect of the cocycle condition for the lambda-modified bracket.

    Equals ``dLambda - C`` with ``C`` the corrected jacobiator of ``S``; it is
    minus the corrected jacobiator of the modified bracket, so it vanishes
    exactly when the modified bracket satisfies the Jacobi-type identity.
    """
    _check_lambda(S, Lam)
    _, _, C = obstructions(S, e1, e2, e3)
    return lambda_differential(S, Lam, e1, e2, e3) - C

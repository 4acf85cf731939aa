"""Linear algebra of Dirac subspaces of a para-Hermitian vector space.

The model space is ``Q^{2n}`` with adapted basis ``(b_1..b_n, c_1..c_n)``:
``g(b_i, c_j) = delta_ij``, ``g(b, b) = g(c, c) = 0``, ``F = +1`` on the
``b`` block and ``-1`` on the ``c`` block, ``omega(X, Y) = g(FX, Y)``.
Vectors are tuples of :class:`fractions.Fraction`; subspaces are kept as
canonical row-reduced bases, so subspace equality is equality of bases.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from functools import cached_property
from typing import Iterable, Sequence

from .errors import (
    DimensionMismatch,
    InvariantMismatch,
    NotComplement,
    NotDirac,
    NotInWPlus,
    ShapeMismatch,
    SingularMetric,
)
from .linalg import Matrix

__all__ = [
    "ParaHermitianSpace",
    "Subspace",
    "DiracInvariants",
    "is_dirac",
    "conjugated_basis",
    "isotropic_complement",
    "complement_offset",
    "apply_offset",
    "invariants",
    "graph_data",
    "reconstruct",
    "ph_transport",
    "embed",
    "symplectic_basis",
]

Vector = tuple


def _vec(v: Iterable) -> Vector:
    return tuple(Fraction(x) for x in v)


def _dot(u: Sequence, v: Sequence) -> Fraction:
    return sum((a * b for a, b in zip(u, v)), Fraction(0))


class Subspace:
    """Row space of a rational matrix, stored in reduced row-echelon form."""

    __slots__ = ("dim_ambient", "basis")

    def __init__(self, vectors: Iterable[Iterable], dim_ambient: int | None = None):
        rows = [_vec(v) for v in vectors]
        if dim_ambient is None:
            if not rows:
                raise DimensionMismatch("an empty subspace needs its ambient dimension")
            dim_ambient = len(rows[0])
        if any(len(r) != dim_ambient for r in rows):
            raise DimensionMismatch(f"vectors must have length {dim_ambient}")
        self.dim_ambient = dim_ambient
        if rows:
            R, piv = Matrix(rows).rref()
            self.basis = tuple(tuple(Fraction(x) for x in R.row(i)) for i in range(len(piv)))
        else:
            self.basis = ()

    @property
    def dim(self) -> int:
        return len(self.basis)

    def __eq__(self, other) -> bool:
        return isinstance(other, Subspace) and self.dim_ambient == other.dim_ambient and self.basis == other.basis

    def __hash__(self) -> int:
        return hash(self.basis)

    def __repr__(self) -> str:
        return f"Subspace(dim={self.dim}, basis={[list(map(str, b)) for b in self.basis]})"

    def contains(self, v: Sequence) -> bool:
        return Subspace(list(self.basis) + [_vec(v)], self.dim_ambient).dim == self.dim

    def __add__(self, other: "Subspace") -> "Subspace":
        return Subspace(list(self.basis) + list(other.basis), self.dim_ambient)

    def intersect(self, other: "Subspace") -> "Subspace":
        if not self.basis or not other.basis:
            return Subspace([], self.dim_ambient)
        # x U = y V  <=>  (x, y) in null([U^T | -V^T])
        cols = list(self.basis) + [tuple(-a for a in v) for v in other.basis]
        null = Matrix.from_columns(cols).nullspace()
        k = self.dim
        vecs = [tuple(_dot(x[:k], col) for col in zip(*self.basis)) for x in null]
        return Subspace(vecs, self.dim_ambient)

    def image(self, M: Matrix) -> "Subspace":
        return Subspace([M.apply(v) for v in self.basis], M.shape[0])

    def coordinates(self, v: Sequence) -> tuple | None:
        """Coefficients of ``v`` in the canonical basis, or None if ``v`` is outside."""
        sol = Matrix.from_columns(list(self.basis)).solve(_vec(v)) if self.basis else None
        if not self.basis:
            return () if not any(v) else None
        return None if sol is None else tuple(Fraction(x) for x in sol)


class ParaHermitianSpace:
    """The standard model of dimension ``2n``."""

    def __init__(self, n: int):
        if n < 1:
            raise DimensionMismatch("n must be positive")
        self.n = n
        z, o = Fraction(0), Fraction(1)
        N = 2 * n
        self.g = Matrix([[o if abs(i - j) == n else z for j in range(N)] for i in range(N)])
        self.F = Matrix([[(o if i < n else -o) if i == j else z for j in range(N)] for i in range(N)])
        self.omega = self.F.T @ self.g

    @property
    def dim(self) -> int:
        return 2 * self.n

    def b(self, i: int) -> Vector:
        return tuple(Fraction(1 if j == i else 0) for j in range(self.dim))

    def c(self, i: int) -> Vector:
        return tuple(Fraction(1 if j == self.n + i else 0) for j in range(self.dim))

    @cached_property
    def W_plus(self) -> Subspace:
        return Subspace([self.b(i) for i in range(self.n)])

    @cached_property
    def W_minus(self) -> Subspace:
        return Subspace([self.c(i) for i in range(self.n)])

    def F_plus(self, v: Sequence) -> Vector:
        return tuple(Fraction(x) if i < self.n else Fraction(0) for i, x in enumerate(v))

    def F_minus(self, v: Sequence) -> Vector:
        return tuple(Fraction(0) if i < self.n else Fraction(x) for i, x in enumerate(v))

    def pair(self, u: Sequence, v: Sequence) -> Fraction:
        return _dot(u, self.g.apply(_vec(v)))

    def omega_pair(self, u: Sequence, v: Sequence) -> Fraction:
        return _dot(u, self.omega.apply(_vec(v)))

    def subspace(self, vectors: Iterable[Iterable]) -> Subspace:
        return Subspace(vectors, self.dim)

    def check(self) -> dict[str, Matrix]:
        """Residuals of ``F^2 = I``, ``F^T g F = -g`` and skewness of ``omega``."""
        I = Matrix.identity(self.dim, Fraction(1), Fraction(0))
        return {
            "F^2 - I": self.F @ self.F - I,
            "F^T g F + g": self.F.T @ self.g @ self.F + self.g,
            "omega + omega^T": self.omega + self.omega.T,
        }


def _check_ambient(W: ParaHermitianSpace, L: Subspace) -> None:
    if L.dim_ambient != W.dim:
        raise DimensionMismatch(f"subspace of a {L.dim_ambient}-dimensional space, expected {W.dim}")


def is_dirac(W: ParaHermitianSpace, L: Subspace) -> tuple[bool, str]:
    """Maximal isotropy; the certificate names the dimension or an offending pair."""
    _check_ambient(W, L)
    if L.dim != W.n:
        return False, f"dim L = {L.dim}, expected {W.n}"
    for i, u in enumerate(L.basis):
        for j in range(i, L.dim):
            v = W.pair(u, L.basis[j])
            if v:
                return False, f"g(l{i + 1}, l{j + 1}) = {v}"
    return True, ""


def _require_dirac(W: ParaHermitianSpace, L: Subspace, name: str = "L") -> None:
    ok, why = is_dirac(W, L)
    if not ok:
        raise NotDirac(f"{name} is not a Dirac subspace: {why}")


def _lbasis(W: ParaHermitianSpace, L: Subspace, lbasis) -> list[Vector]:
    if lbasis is None:
        return list(L.basis)
    out = [_vec(v) for v in lbasis]
    if len(out) != L.dim or Subspace(out, W.dim) != L:
        raise DimensionMismatch("lbasis is not a basis of L")
    return out


def conjugated_basis(W: ParaHermitianSpace, L: Subspace, S: Subspace, lbasis=None) -> list[Vector]:
    """The unique basis ``s_j`` of ``S`` with ``g(l_i, s_j) = delta_ij``."""
    _check_ambient(W, L)
    _check_ambient(W, S)
    ls = _lbasis(W, L, lbasis)
    if L.dim + S.dim != W.dim or (L + S).dim != W.dim:
        raise NotComplement("S is not a complement of L")
    M = Matrix([[W.pair(l, s) for s in S.basis] for l in ls])
    try:
        Cm = M.T.inverse()
    except SingularMetric:
        raise NotComplement("g pairs L and S degenerately") from None
    # s_j = sum_a Cm[j][a] S_a  with  sum_a M[i][a] Cm[j][a] = delta_ij
    return [tuple(_dot(Cm.row(j), col) for col in zip(*S.basis)) for j in range(len(ls))]


def isotropic_complement(W: ParaHermitianSpace, L: Subspace, S: Subspace, lbasis=None) -> Subspace:
    """``u_i = s_i + tau_i^k l_k`` with ``tau = -1/2 g(s_i, s_j)``, a Dirac complement of ``L``."""
    _require_dirac(W, L)
    ls = _lbasis(W, L, lbasis)
    s = conjugated_basis(W, L, S, ls)
    n = W.n
    us = []
    for i in range(n):
        u = list(s[i])
        for k in range(n):
            tau = -W.pair(s[i], s[k]) / 2
            if tau:
                u = [a + tau * b for a, b in zip(u, ls[k])]
        us.append(tuple(u))
    return Subspace(us, W.dim)


def complement_offset(W: ParaHermitianSpace, L: Subspace, L1: Subspace, L2: Subspace, lbasis=None) -> Matrix:
    """Skew ``theta`` with ``v_i = u_i + theta[i][j] l_j`` for conjugated bases ``u`` of ``L1`` and ``v`` of ``L2``."""
    _require_dirac(W, L)
    _require_dirac(W, L1, "L'")
    _require_dirac(W, L2, "L''")
    ls = _lbasis(W, L, lbasis)
    u = conjugated_basis(W, L, L1, ls)
    v = conjugated_basis(W, L, L2, ls)
    Lm = Matrix.from_columns(ls)
    rows = []
    for ui, vi in zip(u, v):
        coeffs = Lm.solve(tuple(a - b for a, b in zip(vi, ui)))
        if coeffs is None:  # pragma: no cover - impossible for complements of L
            raise NotComplement("conjugated bases differ outside L")
        rows.append([Fraction(x) for x in coeffs])
    return Matrix(rows)


def apply_offset(W: ParaHermitianSpace, L: Subspace, L1: Subspace, theta, lbasis=None) -> Subspace:
    """The complement ``span(u_i + theta[i][j] l_j)``; inverse of :func:`complement_offset`."""
    ls = _lbasis(W, L, lbasis)
    theta = theta if isinstance(theta, Matrix) else Matrix(theta)
    if theta.shape != (W.n, W.n) or not theta.map(Fraction).is_skew():
        raise ShapeMismatch("theta must be a skew n x n matrix")
    u = conjugated_basis(W, L, L1, ls)
    out = []
    for i, ui in enumerate(u):
        w = list(ui)
        for j in range(W.n):
            t = Fraction(theta[i, j])
            if t:
                w = [a + t * b for a, b in zip(w, ls[j])]
        out.append(tuple(w))
    return Subspace(out, W.dim)


@dataclass(frozen=True)
class DiracInvariants:
    k: int
    h: int
    r: int
    kernel: Subspace

    def __str__(self) -> str:
        return f"k={self.k} h={self.h} r={self.r}"


def _omega_gram(W: ParaHermitianSpace, vecs: Sequence[Vector]) -> Matrix:
    return Matrix([[W.omega_pair(a, b) for b in vecs] for a in vecs])


def invariants(W: ParaHermitianSpace, L: Subspace) -> DiracInvariants:
    """``k = dim(W- & L)``, ``h = dim(W+ & L)``, ``r = rank(omega|L)`` and ``ker(omega|L)``.

    The kernel is computed directly and compared with both
    ``(W+ & L) + (W- & L)`` and ``L & F(L)``; ``k + h = n - r`` is checked.
    """
    _require_dirac(W, L)
    minus = W.W_minus.intersect(L)
    plus = W.W_plus.intersect(L)
    G = _omega_gram(W, L.basis)
    r = G.rank()
    null = G.T.nullspace()
    kernel = Subspace([tuple(_dot(x, col) for col in zip(*L.basis)) for x in null], W.dim)
    if kernel != plus + minus or kernel != L.intersect(L.image(W.F)):
        raise InvariantMismatch("kernel characterizations of omega|L disagree")
    if minus.dim + plus.dim != W.n - r:
        raise InvariantMismatch(f"k + h = {minus.dim + plus.dim} but n - r = {W.n - r}")
    return DiracInvariants(minus.dim, plus.dim, r, kernel)


def _preimage(W: ParaHermitianSpace, L: Subspace, proj, target: Vector) -> Vector:
    # some w in L with proj(w) = target
    imgs = [proj(b) for b in L.basis]
    x = Matrix.from_columns(imgs).solve(target)
    return tuple(_dot(x, col) for col in zip(*L.basis))


def graph_data(W: ParaHermitianSpace, L: Subspace, side: str = "+") -> tuple[Subspace, Matrix]:
    """``(L_side, omega_side)`` with ``omega_side`` the Gram matrix on the canonical basis of ``L_side``.

    ``omega_+(F+ w, F+ w') = g(F- w, F+ w')`` and symmetrically for ``-``;
    this equals ``-1/2 omega(w, w')`` and is the normalization under which
    :func:`reconstruct` inverts this map.
    """
    _require_dirac(W, L)
    if side not in ("+", "-"):
        raise ValueError("side must be '+' or '-'")
    proj, other = (W.F_plus, W.F_minus) if side == "+" else (W.F_minus, W.F_plus)
    Ls = Subspace([proj(b) for b in L.basis], W.dim)
    pre = [_preimage(W, L, proj, u) for u in Ls.basis]
    om = Matrix([[W.pair(other(a), proj(b)) for b in pre] for a in pre]) if pre else Matrix([])
    return Ls, om


def reconstruct(W: ParaHermitianSpace, Lplus: Subspace, omega_plus, side: str = "+") -> Subspace:
    """``{w : F+ w in L+, g(F- w, u) = omega+(F+ w, u) for u in L+}`` (``side='-'`` swaps the roles)."""
    _check_ambient(W, Lplus)
    n = W.n
    own = range(n) if side == "+" else range(n, 2 * n)
    if any(v[i] for v in Lplus.basis for i in range(2 * n) if i not in own):
        raise NotInWPlus(f"the subspace is not contained in W{side}")
    m = Lplus.dim
    om = omega_plus if isinstance(omega_plus, Matrix) else Matrix(omega_plus) if m else Matrix([])
    if m:
        om = om.map(Fraction)
        if om.shape != (m, m) or not om.is_skew():
            raise ShapeMismatch(f"omega must be a skew {m}x{m} matrix")
    U = Lplus.basis
    other = [i for i in range(2 * n) if i not in own]
    # unknowns (x_1..x_m, y_1..y_n): w = sum x_a U_a + sum y_j e_{other_j}
    rows = []
    for b in range(m):
        # g(y, U_b) - sum_a x_a om[a][b] = 0
        row = [-om[a, b] for a in range(m)]
        for j, oj in enumerate(other):
            row.append(sum((W.g[oj, i] * U[b][i] for i in range(2 * n)), Fraction(0)))
        rows.append(row)
    nvars = m + n
    sols = Matrix(rows).nullspace() if rows else [tuple(Fraction(int(i == j)) for j in range(nvars)) for i in range(nvars)]
    out = []
    for s in sols:
        w = [Fraction(0)] * (2 * n)
        for a in range(m):
            if s[a]:
                w = [p + s[a] * q for p, q in zip(w, U[a])]
        for j, oj in enumerate(other):
            w[oj] += Fraction(s[m + j])
        out.append(tuple(w))
    return Subspace(out, W.dim)


def symplectic_basis(gram: Matrix) -> tuple[list[tuple], int]:
    """Coefficient vectors ``(e_1, f_1, ..., e_s, f_s, k_1, ...)`` putting a skew form in normal form.

    ``omega(e_i, f_j) = delta_ij``, all other pairings zero; returns the vectors
    and ``s``.
    """
    m = gram.shape[0]
    G = gram.map(Fraction)
    form = lambda u, v: _dot(u, G.apply(v))
    pool = [tuple(Fraction(int(i == j)) for j in range(m)) for i in range(m)]
    pairs: list[tuple] = []
    while True:
        hit = next(((i, j) for i in range(len(pool)) for j in range(i + 1, len(pool)) if form(pool[i], pool[j])), None)
        if hit is None:
            break
        i, j = hit
        e = pool[i]
        f = tuple(x / form(pool[i], pool[j]) for x in pool[j])
        rest = [v for t, v in enumerate(pool) if t not in (i, j)]
        pool = []
        for x in rest:
            a, b = form(x, f), form(x, e)
            pool.append(tuple(xi - a * ei + b * fi for xi, ei, fi in zip(x, e, f)))
        pairs += [e, f]
    kernel = Subspace(pool, m).basis if pool else ()
    return pairs + list(kernel), len(pairs) // 2


def embed(A: Matrix) -> Matrix:
    """``A -> diag(A, A^-T)``."""
    A = A.map(Fraction)
    return Matrix.block_diag([A, A.inverse().T], Fraction(0))


def _adapted_plus_basis(W: ParaHermitianSpace, L: Subspace) -> list[Vector]:
    """Columns in ``Q^n``: a normal-form basis of ``L+`` extended to a basis of ``W+``."""
    Lp, om = graph_data(W, L, "+")
    n = W.n
    vecs = []
    if Lp.dim:
        coeffs, _ = symplectic_basis(om)
        for c in coeffs:
            vecs.append(tuple(_dot(c, col) for col in zip(*Lp.basis))[:n])
    span = Subspace(vecs, n) if vecs else Subspace([], n)
    for i in range(n):
        e = tuple(Fraction(int(i == j)) for j in range(n))
        if not span.contains(e):
            vecs.append(e)
            span = Subspace(vecs, n)
    return vecs


def ph_transport(W: ParaHermitianSpace, L: Subspace, L2: Subspace) -> Matrix:
    """``psi = diag(A, A^-T)`` in ``pH(W)`` with ``psi L = L2``."""
    i1, i2 = invariants(W, L), invariants(W, L2)
    if (i1.k, i1.r) != (i2.k, i2.r):
        raise InvariantMismatch(f"invariants differ: ({i1}) vs ({i2})")
    P1 = Matrix.from_columns(_adapted_plus_basis(W, L))
    P2 = Matrix.from_columns(_adapted_plus_basis(W, L2))
    return embed(P2 @ P1.inverse())

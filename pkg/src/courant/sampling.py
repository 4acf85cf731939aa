"""Deterministic random polynomials and sections.

The generator is :class:`random.Random` (Mersenne Twister) seeded with an
integer, which produces the same stream on every platform and Python version
since 3.2.  Coefficients are integers in ``[-3, 3]``; every monomial of total
degree at most ``degree`` gets an independent coefficient, so low-degree
samples still exercise all variables.
"""

from __future__ import annotations

import random
from functools import lru_cache
from itertools import combinations_with_replacement

from .scalars import Chart, RationalScalar

__all__ = ["make_rng", "random_polynomial", "random_sections", "random_vector_field", "random_one_form", "COEFF_RANGE"]

COEFF_RANGE = (-3, 3)


def make_rng(seed: int) -> random.Random:
    return random.Random(seed)


@lru_cache(maxsize=None)
def _monomials(dim: int, degree: int) -> tuple[tuple[int, ...], ...]:
    out = []
    for d in range(degree + 1):
        for combo in combinations_with_replacement(range(dim), d):
            exps = [0] * dim
            for i in combo:
                exps[i] += 1
            out.append(tuple(exps))
    return tuple(out)


def random_polynomial(chart: Chart, rng: random.Random, degree: int = 2) -> RationalScalar:
    if degree < 0:
        raise ValueError("degree must be nonnegative")
    lo, hi = COEFF_RANGE
    terms = {}
    for m in _monomials(chart.dim, degree):
        c = rng.randint(lo, hi)
        if c:
            terms[m] = c
    return RationalScalar(chart.ring.from_dict(terms) if terms else chart.ring.zero)


def random_sections(chart: Chart, rank: int, count: int, degree: int = 2, seed: int = 1, rng: random.Random | None = None):
    """``count`` sections of a rank-``rank`` bundle with polynomial components."""
    from .core import ESection

    rng = rng or make_rng(seed)
    return [ESection(chart, [random_polynomial(chart, rng, degree) for _ in range(rank)]) for _ in range(count)]


def random_vector_field(chart: Chart, rng: random.Random, degree: int = 2):
    from .calculus import VectorField

    return VectorField(chart, [random_polynomial(chart, rng, degree) for _ in range(chart.dim)])


def random_one_form(chart: Chart, rng: random.Random, degree: int = 2):
    from .calculus import DifferentialForm

    return DifferentialForm.from_dense(chart, [random_polynomial(chart, rng, degree) for _ in range(chart.dim)])

"""Exact symbolic verification of Courant-type bracket structures on one chart."""

from .scalars import Chart, RationalScalar

__all__ = ["Chart", "RationalScalar"]
__version__ = "0.1.0"

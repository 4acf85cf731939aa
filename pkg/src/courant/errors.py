"""Exception hierarchy.

Every error raised on purpose by the package derives from :class:`CourantError`,
so callers (the CLI in particular) can separate input problems from bugs.
"""


class CourantError(Exception):
    """Base class for all package errors."""


class DivisionByZero(CourantError, ZeroDivisionError):
    pass


class IndexOutOfRange(CourantError, IndexError):
    pass


class ChartMismatch(CourantError, ValueError):
    pass


class ShapeMismatch(CourantError, ValueError):
    pass


class DegreeOverflow(CourantError, ValueError):
    pass


class DegreeUnderflow(CourantError, ValueError):
    pass


class SingularMetric(CourantError, ValueError):
    pass


class NotMetricConnection(CourantError, ValueError):
    pass


class NotPoisson(CourantError, ValueError):
    pass


class InvalidParaHermitian(CourantError, ValueError):
    pass


class BetaTorsionMismatch(CourantError, ValueError):
    pass


class FlavorMismatch(CourantError, ValueError):
    pass


class LambdaNotAnchorKilling(CourantError, ValueError):
    pass


class PropertyIFails(CourantError, ValueError):
    pass


class NotFoliatedMetric(CourantError, ValueError):
    pass


class AnchorNotLeafwise(CourantError, ValueError):
    pass


class AnchorNotSurjective(CourantError, ValueError):
    pass


class RankTooSmall(CourantError, ValueError):
    pass


class IsotropyFails(CourantError, ValueError):
    pass


class InvalidComponentConnection(CourantError, ValueError):
    pass


class InvalidLambda(CourantError, ValueError):
    pass


class DimensionMismatch(CourantError, ValueError):
    pass


class NotComplement(CourantError, ValueError):
    pass


class NotDirac(CourantError, ValueError):
    pass


class NotInWPlus(CourantError, ValueError):
    pass


class InvariantMismatch(CourantError, ValueError):
    pass


class UnknownCoordinate(CourantError, ValueError):
    pass


class ExpressionSyntaxError(CourantError, ValueError):
    """Malformed expression; ``pos`` is the 0-based offset into the source text."""

    def __init__(self, message: str, pos: int = 0):
        super().__init__(f"{message} (at offset {pos})")
        self.message = message
        self.pos = pos


class StructureSyntaxError(CourantError, ValueError):
    """Structure-file problem located at a 1-based ``line`` and ``col``."""

    def __init__(self, message: str, line: int, col: int):
        super().__init__(f"line {line}, column {col}: {message}")
        self.message = message
        self.line = line
        self.col = col


class ShapeError(StructureSyntaxError):
    pass

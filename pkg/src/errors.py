"""Exception hierarchy shared by every layer, plus the CLI exit-code mapping."""


class HalfsphereError(Exception):
    """Base class for all errors raised by this package."""


class UsageError(HalfsphereError, ValueError):
    """A precondition of an operation was violated by the caller."""


class AmbiguityError(UsageError):
    """The requested object is not uniquely defined (e.g. antipodal geodesic)."""


class UnsupportedDimensionError(UsageError):
    """The operation is only implemented for some sphere dimensions."""


class NumericalFailure(HalfsphereError, ArithmeticError):
    """A computation produced non-finite or degenerate values."""

    def __init__(self, message: str, location: float | None = None):
        super().__init__(message)
        self.location = location


class SinkhornDivergence(NumericalFailure):
    """Sinkhorn did not reach the marginal tolerance within max_iter."""

    def __init__(self, violation: float, iterations: int, reg: float):
        super().__init__(
            f"Sinkhorn stopped after {iterations} iterations at reg={reg:.3g} "
            f"with marginal violation {violation:.3e}"
        )
        self.violation = violation
        self.iterations = iterations
        self.reg = reg


class DegenerateBarycenterError(NumericalFailure):
    """A source point has no conditional mass or an antipodally balanced one."""

    def __init__(self, index: int):
        super().__init__(f"Degenerate barycenter for source point {index}")
        self.index = index


class ConfigError(HalfsphereError):
    """An experiment config could not be parsed or validated."""

    def __init__(self, message: str, field: str | None = None):
        super().__init__(f"{field}: {message}" if field else message)
        self.field = field


class InvariantViolation(HalfsphereError):
    """At least one experiment assertion failed during a run."""


EXIT_OK = 0
EXIT_INVARIANT = 1
EXIT_CONFIG = 2
EXIT_NUMERICAL = 3


def exit_code_for(exc: BaseException) -> int:
    if isinstance(exc, InvariantViolation):
        return EXIT_INVARIANT
    if isinstance(exc, ConfigError):
        return EXIT_CONFIG
    if isinstance(exc, (NumericalFailure, OSError)):
        return EXIT_NUMERICAL
    if isinstance(exc, HalfsphereError):
        return EXIT_CONFIG
    return EXIT_NUMERICAL

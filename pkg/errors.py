from typing import Any, List, Optional


class DynamicsError(Exception):
    """Base class for every failure raised by the library."""

    exit_code = 1


class InvalidArgumentError(DynamicsError, ValueError):
    """An argument violates an operation's precondition."""


class ConfigError(DynamicsError, ValueError):
    """The experiment configuration could not be parsed or validated."""

    exit_code = 2


class NoCertificateError(DynamicsError, ValueError):
    """No Bezout certificate exists (the resultant vanishes)."""


class HypothesisNotMetError(DynamicsError, ValueError):
    """A proposition's hypothesis (for example deg(c) > m) does not hold."""


class UnsupportedError(DynamicsError, ValueError):
    """The input lies outside what the implementation handles."""


class UndefinedRatioError(DynamicsError, ZeroDivisionError):
    """A height ratio was requested with a zero denominator height."""


class NumericFailureError(DynamicsError, RuntimeError):
    """Numeric iteration did not reach the requested certification."""

    def __init__(self, message: str, best_radii: Optional[List[float]] = None):
        """Initialize the failure.

        Args:
            message: Human readable description
            best_radii: Inclusion radii reached before giving up
        """
        super().__init__(message)
        self.best_radii = best_radii or []


class ResourceLimitError(DynamicsError, RuntimeError):
    """A configured degree or coefficient-size cap was exceeded."""

    exit_code = 3

    def __init__(self, message: str, partial: Any = None):
        """Initialize the failure.

        Args:
            message: Human readable description
            partial: Whatever was computed before the cap was hit
        """
        super().__init__(message)
        self.partial = partial


class DegreeStagnationError(DynamicsError, RuntimeError):
    """Iterate degrees never exceeded m within the search cap."""


class InvariantViolationError(DynamicsError, AssertionError):
    """An internal invariant failed; this indicates a bug, not bad input."""

    exit_code = 4

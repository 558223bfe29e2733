"""
Exception hierarchy for the alphaform engine.

Identity and normalization failures carry their polynomial witnesses so a
failing check can be printed and diffed.
"""
from typing import Any, Optional


class AlphaformError(Exception):
    """Base class for engine errors."""


class GraphError(AlphaformError, ValueError):
    """Invalid graph input (range, self-loop, empty vertex set)."""


class GraphParseError(GraphError):
    """Malformed graph file."""

    def __init__(self, message: str, line: int, column: int = 1):
        self.line = line
        self.column = column
        super().__init__(f"line {line}, column {column}: {message}")


class RegistryMismatch(AlphaformError, ValueError):
    """Operands live over different variable registries."""


class NonExactDivision(AlphaformError, ArithmeticError):
    """Division left a nonzero remainder."""

    def __init__(self, dividend: Any, divisor: Any, remainder: Any):
        self.dividend = dividend
        self.divisor = divisor
        self.remainder = remainder
        super().__init__(f"({divisor}) does not divide exactly; remainder {remainder}")


class IdentityMismatch(AlphaformError, AssertionError):
    """Two sides of an identity that must agree do not."""

    def __init__(self, name: str, lhs: Any, rhs: Any):
        self.name = name
        self.lhs = lhs
        self.rhs = rhs
        super().__init__(f"{name}: lhs {lhs} != rhs {rhs}")


class GuardExceeded(AlphaformError, ValueError):
    """A size guard refused an expansion."""

    def __init__(self, what: str, size: int, limit: int):
        self.what = what
        self.size = size
        self.limit = limit
        super().__init__(f"{what}: size {size} exceeds limit {limit}")


class CertificateFailure(AlphaformError):
    """A cancellation certificate could not pair a term."""

    def __init__(self, message: str, term: Optional[Any] = None):
        self.term = term
        super().__init__(message if term is None else f"{message}: {term}")

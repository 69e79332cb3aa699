"""Exception types shared across the simulator."""

__all__ = [
    "FenesimError",
    "DomainOverflow",
    "Singular",
    "InvalidOrder",
    "RejectedMatrix",
    "GridMismatch",
    "CflViolation",
    "NonConvergence",
    "VacuumBreakdown",
    "NegativeInput",
    "NonFinite",
    "ValidationError",
    "FormatError",
]


class FenesimError(Exception):
    """Base class for all simulator errors."""


class DomainOverflow(FenesimError):
    """Spring elongation argument at or beyond the finite extensibility bound b/2."""


class Singular(FenesimError):
    """Configuration vector at or beyond the ball boundary |q|^2 >= b."""


class InvalidOrder(FenesimError):
    """Quadrature order too small to carry the weighted rule."""


class RejectedMatrix(FenesimError):
    """Supplied coupling matrix is not symmetric positive definite."""


class GridMismatch(FenesimError):
    """Field shapes disagree with the grids they are defined on."""


class CflViolation(FenesimError):
    """Requested time step exceeds the advective stability limit."""

    def __init__(self, msg: str, dt: float = float("nan"), limit: float = float("nan")):
        super().__init__(msg)
        self.dt = dt
        self.limit = limit


class NonConvergence(FenesimError):
    """Implicit solve failed its residual tolerance."""


class VacuumBreakdown(FenesimError):
    """Density fell below the vacuum floor where momentum is still nonzero."""


class NegativeInput(FenesimError):
    """Negative value passed where a nonnegative field or argument is required."""


class NonFinite(FenesimError):
    """A state field stopped being finite; carries the step index if known."""

    def __init__(self, msg: str, step: int | None = None):
        super().__init__(msg)
        self.step = step


class ValidationError(FenesimError):
    """One or more configuration values rejected; collects every violation.

    The string form lists all violations, one per line, each naming the
    offending dotted key.
    """

    def __init__(self, violations: list[str]):
        self.violations = list(violations)
        super().__init__("\n".join(self.violations))


class FormatError(FenesimError):
    """Malformed snapshot or CSV file; message cites the line number."""

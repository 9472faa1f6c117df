"""Exception types shared across the billiard toolkit."""


class BilliardError(Exception):
    """Base class for all toolkit errors."""


class DomainError(BilliardError, ValueError):
    """An argument lies outside an operation's domain of validity."""


class SingularityError(DomainError):
    """Evaluation exactly at the attracting centre."""


class CollisionalOrbitError(BilliardError):
    """C^2 <= 2*beta: the motion falls into the centre and has no conic elements."""


class EscapeError(BilliardError):
    """The orbit never returns to the wall."""


class NearCollisionError(BilliardError):
    """Numerical integration stalled near the centre.

    ``last_sample`` holds the last valid trajectory sample, when available.
    """

    def __init__(self, message, last_sample=None):
        super().__init__(message)
        self.last_sample = last_sample


class PartialWordError(BilliardError):
    """Symbol extraction stopped early (escape or collision inside the window).

    ``symbols`` carries the prefix obtained before the failure.
    """

    def __init__(self, message, symbols=()):
        super().__init__(message)
        self.symbols = tuple(symbols)


class SolverError(BilliardError):
    """An optimizer failed to converge; ``diagnostics`` carries solver state."""

    def __init__(self, message, diagnostics=None):
        super().__init__(message)
        self.diagnostics = dict(diagnostics or {})

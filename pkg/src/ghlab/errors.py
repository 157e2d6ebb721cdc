"""Exception types shared across the package."""


class GhlabError(Exception):
    """Base class for all package errors."""


class PreconditionError(GhlabError, ValueError):
    """An operation was called outside its documented domain."""


class CommutatorTooLarge(PreconditionError):
    """The two Hermitian matrices do not commute within tolerance."""


class ResonantMode(PreconditionError):
    """The mode mean lies (numerically) on the imaginary integer lattice."""


class SingularSystem(PreconditionError):
    """The Galerkin system for a mode is singular or numerically singular."""


class TruncationInsufficient(GhlabError, RuntimeError):
    """Fourier tail of a Galerkin solution is above the acceptance level."""


class ResonantIndexPresent(PreconditionError):
    """An index with exactly integer a0*mu_j was passed to the exponent fit."""


class NotFound(GhlabError, LookupError):
    """Witness search exhausted its budget.

    ``depth`` is the deepest level reached (0 when nothing was found) and
    ``level`` the first level that could not be met.
    """

    def __init__(self, depth: int, message: str = ""):
        self.depth = depth
        self.level = depth + 1
        super().__init__(message or f"search exhausted at depth {depth}")


class NotSignChanging(PreconditionError):
    """A sign-change frame was requested for a function that keeps its sign."""


class DegenerateExtremum(PreconditionError):
    """Extremum of the primitive cannot be separated from the window edges."""


class ConfigError(GhlabError, ValueError):
    """Configuration text could not be parsed or validated."""

    def __init__(self, message: str, location: str = ""):
        self.location = location
        super().__init__(f"{location}: {message}" if location else message)

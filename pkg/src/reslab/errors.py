"""Exception hierarchy shared by all reslab modules."""


class ResLabError(Exception):
    """Base class for reslab errors."""


class DomainError(ResLabError, ValueError):
    """A point lies outside the region where an object is defined."""


class ParameterError(ResLabError, ValueError):
    """Inconsistent or out-of-range parameters."""


class FitError(ResLabError, RuntimeError):
    """Not enough usable data for a least-squares fit."""


class AccuracyError(ResLabError, RuntimeError):
    """A requested accuracy could not be reached within the node budget."""


class ConvergenceError(ResLabError, RuntimeError):
    """An iteration did not converge.

    The last iterate is stored in ``last``.
    """

    def __init__(self, message, last=None):
        super().__init__(message)
        self.last = last


class NearResonanceError(ResLabError, RuntimeError):
    """A resolvent solve is too ill-conditioned: ``lam`` is close to a pole."""

    def __init__(self, message, lam=None):
        super().__init__(message)
        self.lam = lam


class RepositionError(ParameterError):
    """The counting contour passes too close to a zero; move the rectangle."""

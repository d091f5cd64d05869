"""Exception hierarchy.

Every error the library raises on purpose derives from :class:`QshjeError`.
The CLI maps the three branches below to distinct exit codes.
"""


class QshjeError(Exception):
    """Base class for library errors."""


class InvalidInput(QshjeError, ValueError):
    """An argument violates a documented precondition."""


class NumericalFailure(QshjeError, ArithmeticError):
    """A computed quantity missed its tolerance.

    Attributes
    ----------
    worst : object
        Where the violation was largest (a node, point or instance).
    value : float
        Size of the violation at ``worst``.
    """

    def __init__(self, message, worst=None, value=None):
        super().__init__(message)
        self.worst = worst
        self.value = value


class DegenerateInput(QshjeError):
    """The input sits on a degenerate set (zero phase, singular transform...)."""

    def __init__(self, message, detail=None):
        super().__init__(message)
        self.detail = detail


class UndefinedPhase(DegenerateInput):
    """psi1 and psi2 vanish together, so S0 and its gradient are undefined."""


class ExcludedPoint(DegenerateInput):
    """A point cannot be used for a residual (R = 0, missing V', ...)."""


class NoEigenvalue(NumericalFailure):
    """A bound-state search found no eigenvalue in the bracket."""


class NotRepresentable(DegenerateInput):
    """A coefficient vector has no decomposition in the normalized gauge."""


class DegenerateTransform(DegenerateInput):
    """The choice of k that normalizes the tilde parameters does not exist."""


class RealWavefunction(DegenerateInput):
    """|alpha| = |beta|: the wave function is real up to a phase and S0 is not recoverable from it."""


class BranchPoint(DegenerateInput):
    """The phase-aligned real part of the wave function vanishes at the point."""

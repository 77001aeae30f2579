"""Exception hierarchy.  The CLI maps these onto exit codes."""


class PwhelmError(Exception):
    """Base class for all package errors."""


class SpecError(PwhelmError, ValueError):
    """Invalid configuration, run spec or input geometry."""


class NumericalError(PwhelmError, ArithmeticError):
    """A computation could not produce a trustworthy result."""


class DegenerateDenominatorError(NumericalError):
    """The dispersion-relation denominator vanishes at this sample."""


class EvanescentModeError(NumericalError):
    """N/D < 0: the scheme carries no propagating plane wave here."""


class FitError(NumericalError):
    """Least-squares parameter fit failed (e.g. rank deficient)."""


class SolverError(NumericalError):
    """Linear solve failed or missed its residual target."""

    def __init__(self, message, residual=None, frequency=None):
        super().__init__(message)
        self.residual = residual
        self.frequency = frequency


class FootprintError(PwhelmError, IndexError):
    """A stencil footprint would reach outside the grid."""

"""Exception hierarchy.

Two families: :class:`DomainError` for inputs that are outside the model's
validated range, and :class:`NumericalError` for computations that could not
be completed reliably. The command line maps them to exit codes 1 and 2.
"""


class JordanLatticeError(Exception):
    """Base class for all package errors."""


class DomainError(JordanLatticeError, ValueError):
    """Invalid word, dimension, time or other user-supplied parameter."""


class NonRealSpectrumError(DomainError):
    """Operation needs a purely real spectrum but ghosts are present."""


class NumericalError(JordanLatticeError, ArithmeticError):
    """A numerical procedure failed or produced an untrustworthy result."""


class EigensolverError(NumericalError):
    pass


class ClassificationError(NumericalError):
    """Non-real eigenvalues could not be grouped into conjugate pairs."""


class DegenerateSpectrumError(NumericalError):
    """Spectrum is degenerate or the operator is defective."""


class NotPositiveDefiniteError(NumericalError):
    def __init__(self, message, min_eigenvalue):
        super().__init__(f"{message} (smallest eigenvalue {min_eigenvalue:.6g})")
        self.min_eigenvalue = min_eigenvalue


class SingularFactorError(NumericalError):
    pass


class GridResolutionError(NumericalError):
    """Grid too coarse or too small to resolve the eigenvalues."""

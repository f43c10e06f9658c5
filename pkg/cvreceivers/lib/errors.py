"""
Exception and warning types raised by the cvreceivers library.
"""


class ReceiverError(ValueError):
    """Base class for every error raised by the library."""


class DomainError(ReceiverError):
    """Argument lies outside the mathematical domain of an operation."""


class RangeError(ReceiverError):
    """Argument lies outside the accuracy contract, or the result overflows."""


class TruncationError(ReceiverError):
    """Fock cutoff too small for the requested amplitude."""


class ShapeError(ReceiverError):
    """Fock vectors with different cutoffs were combined."""


class InvariantError(ReceiverError):
    """A normalization or construction invariant does not hold."""


class DegenerateParameterError(ReceiverError):
    """Parameter value collapses the scheme onto another family."""


class SpecError(ReceiverError):
    """ReceiverSpec fields do not match its family."""


class RankError(ReceiverError):
    """Least-squares design matrix is rank deficient."""


class AccuracyWarning(UserWarning):
    """Quadrature finished without reaching its error target."""

    def __init__(self, message: str, est_abs_error: float = float("nan")):
        super().__init__(message)
        self.est_abs_error = est_abs_error

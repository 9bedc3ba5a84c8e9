"""Exception types shared across the package."""

from __future__ import annotations


class PmfSpaceError(Exception):
    """Base class for domain errors raised by this package."""


class DivisionByZero(PmfSpaceError, ZeroDivisionError):
    """Inversion of zero in a prime field."""


class NonPositiveMass(PmfSpaceError, ValueError):
    """A probability entry was zero or negative."""


class DimensionMismatch(PmfSpaceError, ValueError):
    """Operands live in spaces of different size."""


class ZeroDirection(PmfSpaceError, ValueError):
    """A parity direction vector was all zeros."""


class SingularMatrix(PmfSpaceError, ValueError):
    """A matrix expected to be invertible over GF(q) is singular."""


class NotTailBiting(PmfSpaceError, ValueError):
    """A parity check matrix lacks the cyclic-shift block structure."""


class DetectionFailure(PmfSpaceError):
    """The permutation-extended detector found no converging permutation.

    ``partial`` carries the best available result so callers can still
    use the soft outputs.
    """

    def __init__(self, message: str, partial=None):
        super().__init__(message)
        self.partial = partial

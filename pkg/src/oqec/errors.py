"""Exception types raised by the toolkit."""

from __future__ import annotations


class OQECError(Exception):
    """Base class for all toolkit errors."""


class DimensionMismatch(OQECError, ValueError):
    pass


class NotTracePreserving(OQECError, ValueError):
    """Raised when a Kraus family fails sum_a E_a^dag E_a = 1.

    ``residual`` is the Frobenius norm of the defect and ``spectral_residual``
    its operator norm.
    """

    def __init__(self, residual: float, spectral_residual: float):
        super().__init__(
            f"Kraus family is not trace preserving: "
            f"||sum E^dag E - 1||_F = {residual:.3e} (operator norm {spectral_residual:.3e})"
        )
        self.residual = residual
        self.spectral_residual = spectral_residual


class ClosureNotReached(OQECError, RuntimeError):
    pass


class DecompositionFailed(OQECError, RuntimeError):
    pass


class NotIsometry(OQECError, ValueError):
    pass


class NotUnitary(OQECError, ValueError):
    pass


class NotProjector(OQECError, ValueError):
    pass


class MatrixUnitIdentityViolation(OQECError, ValueError):
    def __init__(self, identity: str, residual: float):
        super().__init__(f"matrix-unit identity {identity!r} violated (residual {residual:.3e})")
        self.identity = identity
        self.residual = residual


class NotCorrectable(OQECError, ValueError):
    pass


class NotVerified(OQECError, ValueError):
    pass


class IndexOutOfRange(OQECError, IndexError):
    pass


class UnknownFixture(OQECError, KeyError):
    pass


class BadParams(OQECError, ValueError):
    pass

"""Exception types shared across the package."""


class KchainError(Exception):
    """Base class for all package errors."""


class InvalidArgument(KchainError, ValueError):
    """An argument violates a documented precondition."""


class OutOfRange(KchainError, ValueError):
    """A time or index falls outside the valid domain."""


class UnsupportedModel(KchainError, ValueError):
    """The requested parameter regime is outside the supported model class."""


class IntegrationDiverged(KchainError, RuntimeError):
    """The ODE state became non-finite.  Carries the failing time."""

    def __init__(self, t: float, message: str | None = None):
        self.t = t
        super().__init__(message or f"integration diverged at t={t:g}")


class IntegrationUnstable(KchainError, RuntimeError):
    """Propagator defect exceeded the stability bound (step too large)."""

    def __init__(self, t: float, defect: float):
        self.t = t
        self.defect = defect
        super().__init__(
            f"propagator defect {defect:.3e} at t={t:g} exceeds 1e-6; reduce dt"
        )


class NumericalFailure(KchainError, RuntimeError):
    """An eigensolver or decomposition failed to converge."""

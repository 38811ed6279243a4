"""Exception hierarchy shared by all modules."""


class RadonLawError(Exception):
    """Base class for every error raised by this package."""


class DomainError(RadonLawError, ValueError):
    """An argument lies outside the domain where an operation is defined."""


class ResolutionError(RadonLawError, ValueError):
    """The grid is too coarse for the requested regularization level."""


class CFLError(RadonLawError, ValueError):
    """A time step violates the CFL restriction of the explicit scheme."""

    def __init__(self, dt, dt_max):
        super().__init__(f"time step {dt:.6g} exceeds CFL limit {dt_max:.6g}")
        self.dt = dt
        self.dt_max = dt_max


class SingularityError(RadonLawError, ArithmeticError):
    """A quantity divides by a vanishing derivative."""


class IntegrationError(RadonLawError, RuntimeError):
    """ODE integration failed; ``table`` holds the last valid (t, xi) nodes."""

    def __init__(self, message, table=None):
        super().__init__(message)
        self.table = table


class BracketError(RadonLawError, ValueError):
    """A root-finding bracket has no sign change."""


class UnsupportedFluxError(RadonLawError, ValueError):
    """The flux lacks the structural constants an operation needs."""


class PreconditionError(RadonLawError, ValueError):
    """Inputs violate a documented precondition of a check."""


class ConfigError(RadonLawError, ValueError):
    """An experiment configuration failed validation."""

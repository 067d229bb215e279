"""Exception types shared across the package."""


class PolymixError(Exception):
    """Base class for all library errors."""


class DimensionError(PolymixError, ValueError):
    """Operand shapes are inconsistent."""


class DomainError(PolymixError, ValueError):
    """A value lies outside the domain implied by a symbol type or function."""


class AllocationError(PolymixError, RuntimeError):
    """The symbol counter would overflow its 62-bit budget."""


class ConfigError(PolymixError, ValueError):
    """A configuration file or CLI request is malformed."""


class BlowUpError(PolymixError, ArithmeticError):
    """A propagated set became non-finite.  Carries the failing step index."""

    def __init__(self, step: int, message: str | None = None):
        self.step = step
        super().__init__(message or f"non-finite state at step {step}")

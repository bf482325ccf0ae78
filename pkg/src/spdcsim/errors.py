"""Exception types shared across the package."""


class SpdcError(Exception):
    """Base class for package errors."""


class DomainError(SpdcError, ValueError):
    """A physical input is outside the domain where the model is defined."""


class ConvergenceError(SpdcError, RuntimeError):
    """A numerical integral failed its convergence check."""


class ConfigError(SpdcError, ValueError):
    """Invalid run configuration."""

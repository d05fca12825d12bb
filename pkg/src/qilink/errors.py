"""Exception types shared across the package."""


class QilinkError(Exception):
    """Base class for all package errors."""


class DomainError(QilinkError, ValueError):
    """An argument lies outside the domain of the operation."""


class PhysicalityError(QilinkError, ValueError):
    """A state or noise model violates the uncertainty principle."""


class ConfigError(QilinkError, ValueError):
    """A configuration file or override could not be parsed or validated."""


class OutputError(QilinkError, OSError):
    """A result file could not be written."""

"""Shared exception types."""


class ProbesiftError(Exception):
    """Base class for all errors raised by this package."""


class ValidationError(ProbesiftError):
    """Input violated a documented precondition or invariant."""


class MacParseError(ValidationError):
    """A MAC address string could not be parsed."""


class NotFoundError(ProbesiftError):
    """A referenced log, scenario, or investigation does not exist."""


class ConflictError(ProbesiftError):
    """The requested operation conflicts with current state (stale version, draft result)."""

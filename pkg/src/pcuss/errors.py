"""Exception hierarchy shared by all modules."""


class PcussError(Exception):
    """Base class."""


class ParameterError(PcussError, ValueError):
    """Inconsistent or unsupported parameters."""


class InputError(PcussError, ValueError):
    """Malformed input (wrong length, duplicate points, ...)."""


class DomainError(PcussError, ArithmeticError):
    """Operation undefined for the given value, e.g. inverting zero."""


class CapabilityError(PcussError):
    """Request exceeds what the implementation can do at desk scale."""


class PreconditionError(PcussError):
    """An operation's documented precondition does not hold."""


class GenerationError(PcussError):
    """Randomised construction failed within its attempt budget."""

    def __init__(self, message: str, stats: dict | None = None):
        super().__init__(message)
        self.stats = stats or {}


class FormatError(PcussError):
    """Artifact header does not match the expected format."""


class CorruptionError(FormatError):
    """Artifact payload is truncated or inconsistent with its header."""

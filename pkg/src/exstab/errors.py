"""Exception types shared across the package."""


class ExstabError(Exception):
    """Base class for all errors raised by exstab."""


class ContractError(ExstabError, ValueError):
    """An argument violates an operation's precondition (size mismatch, bad matching...)."""


class InvalidSizeError(ContractError):
    """Market size not admissible for the requested model."""


class CapExceededError(ExstabError):
    """A computation was refused because its estimated cost exceeds a configured cap."""

    def __init__(self, message: str, required: int | None = None, cap: int | None = None):
        super().__init__(message)
        self.required = required
        self.cap = cap


class ParseError(ExstabError, ValueError):
    """Malformed instance or matching text."""

    def __init__(self, message: str, line: int | None = None):
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)
        self.line = line

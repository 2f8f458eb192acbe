"""Shared exception types for the pipeline."""


class KbqaError(Exception):
    """Base class for all pipeline errors."""


class ParseError(KbqaError):
    """Malformed input (KB line, logical form, wire payload)."""

    def __init__(self, message, line_no=None):
        self.line_no = line_no
        if line_no is not None:
            message = f"line {line_no}: {message}"
        super().__init__(message)


class NotFoundError(KbqaError):
    """Unknown entity id or name."""


class BindingError(KbqaError):
    """Logical form references a name that cannot be resolved."""


class NonExecutableError(KbqaError):
    """Logical form failed to produce an answer set.

    reason is one of: "parse", "bind", "empty", "type", "unknown-relation".
    """

    def __init__(self, reason, message=""):
        self.reason = reason
        super().__init__(message or reason)


class ProtocolError(KbqaError):
    """Malformed response from a remote reader or embedding service."""


class TransportError(KbqaError):
    """Transient transport failure (timeout, 5xx); safe to retry."""


class ConfigError(KbqaError):
    """Bad pipeline configuration."""


class DataError(KbqaError):
    """Inconsistent data files (duplicate ids, qid mismatches, ...)."""

"""Exception hierarchy shared by every module."""


class WorkbenchError(Exception):
    """Base class for all errors raised by the workbench."""


class MismatchError(WorkbenchError, ValueError):
    """Operands disagree on base or arity."""


class ResourceLimitError(WorkbenchError):
    """A construction exceeded the configured state cap."""


class FormatError(WorkbenchError, ValueError):
    """Malformed automaton file."""

    def __init__(self, message, line=None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


class VerdictRefused(WorkbenchError):
    """The avoidance verdict's topological hypothesis could not be certified."""


class InsufficientPrefix(WorkbenchError):
    """An enumerated prefix is too short to certify a gadget value."""

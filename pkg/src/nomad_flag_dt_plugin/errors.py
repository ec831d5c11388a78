"""
Exception hierarchy shared by the geometry core, the CLI and the NOMAD modules.

The CLI maps the input-side errors (``InvalidParamsError``, ``UnknownRootError``,
``UnknownPathError``, ``PreconditionError``) to exit code 2 and
``ConsistencyError`` to exit code 1.
"""


class FlagDTError(Exception):
    """Base class of every error raised by this package."""


class InvalidParamsError(FlagDTError, ValueError):
    """Structure parameters, weights or path specifications are invalid."""


class BackendMismatchError(FlagDTError, TypeError):
    """Exact and floating point values were mixed in one operation."""


class NotSemibasicError(FlagDTError, ValueError):
    """A form carries a vertical (beta) factor where a semibasic one is needed."""


class PreconditionError(FlagDTError, ValueError):
    """An operation was called outside the parameter range where it applies."""


class UnknownRootError(FlagDTError, KeyError):
    """A root label is not one of r1, r2, r3."""

    def __str__(self) -> str:
        return str(self.args[0]) if self.args else 'unknown root'


class UnknownPathError(FlagDTError, KeyError):
    """A built-in scan path name is not known."""

    def __str__(self) -> str:
        return str(self.args[0]) if self.args else 'unknown path'


class ConsistencyError(FlagDTError, RuntimeError):
    """Two independent computations of the same quantity disagree."""


class InexactTargetError(ConsistencyError):
    """A closed invariant 4-form is not exact in the invariant complex."""

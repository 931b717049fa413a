"""Exception hierarchy shared by every conesafe module."""

from __future__ import annotations


class ConesafeError(Exception):
    """Base class for all library errors.

    Loaders may attach a source location (``file``, ``line``, ``column``);
    it is then prefixed to the message.
    """

    file: str | None = None
    line: int | None = None
    column: int | None = None

    def locate(self, file: str | None, line: int | None, column: int | None) -> "ConesafeError":
        self.file, self.line, self.column = file, line, column
        return self

    def __str__(self) -> str:
        msg = super().__str__()
        if self.line is None:
            return f"{self.file}: {msg}" if self.file else msg
        return f"{self.file or '<model>'}:{self.line}:{self.column or 0}: {msg}"


class DomainError(ConesafeError, ValueError):
    """A value lies outside the domain an operation accepts."""


class DisjointnessError(DomainError):
    """Two choices or ensembles that must be disjoint share an index."""


class CapacityError(ConesafeError):
    """An enumeration would exceed its configured bound."""

    def __init__(self, what: str, cardinality: int, bound: int):
        super().__init__(f"{what} has cardinality {cardinality}, exceeding bound {bound}")
        self.cardinality = cardinality
        self.bound = bound


class ValidationError(ConesafeError):
    """A structural check on an automaton or document failed.

    ``check`` names the failed rule, e.g. ``"locator not total"``.
    """

    def __init__(self, check: str, detail: str = ""):
        msg = check if not detail else f"{check}: {detail}"
        super().__init__(msg)
        self.check = check
        self.detail = detail


class RangeCheckError(ValidationError):
    """A functionality assignment produced a value outside its variable's domain."""

    def __init__(self, functionality: str, variable: str, stimulus, value):
        super().__init__(
            "range check failed",
            f"functionality {functionality!r} assigns {variable}={value!r} "
            f"outside its domain at psi={dict(stimulus)}",
        )
        self.functionality = functionality
        self.variable = variable
        self.stimulus = stimulus
        self.value = value


class ExpressionError(ConesafeError):
    """Parse or evaluation failure inside a guarded expression."""

    def __init__(self, message: str, source: str = "", column: int | None = None):
        where = f" at column {column}" if column is not None else ""
        super().__init__(f"{message}{where}" + (f" in {source!r}" if source else ""))
        self.message = message
        self.source = source
        self.column = column


class ModelError(ConesafeError):
    """A model document is malformed; ``path`` is the offending document key path."""

    def __init__(self, message: str, path: str = "", line: int | None = None, column: int | None = None):
        at = f" (at {path})" if path else ""
        super().__init__(f"{message}{at}")
        self.message = message
        self.path = path
        self.line = line
        self.column = column


class TruncationError(ConesafeError):
    """A finite excitation source ran out before the requested walk length."""

    def __init__(self, index: int):
        super().__init__(f"excitation trace exhausted at index {index}")
        self.index = index


class InsufficientDataError(ConesafeError):
    """An estimate was requested from a walk with no matching steps."""


class PreconditionError(ConesafeError):
    """An operation's precondition does not hold (e.g. a cyclic cone)."""


class BindingError(ConesafeError):
    """A profile could not be attached to a cone edge."""

    def __init__(self, message: str, offenders=()):
        super().__init__(message)
        self.offenders = list(offenders)


class ConsistencyError(ConesafeError):
    """Replay of a test diverged from the walk it was derived from."""

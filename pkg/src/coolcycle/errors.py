"""Exception types raised by the parsing and graph-building layers.

Pure numeric routines raise plain ValueError for domain violations; the
classes here cover file- and dataset-level problems where the offending
row or id matters to the caller.
"""


class CoolcycleError(Exception):
    """Base class for all library-specific errors."""


class SchemaError(CoolcycleError):
    """States-file column layout is inconsistent or unusable."""


class ParseError(CoolcycleError):
    """A row could not be tokenized or converted.

    ``row`` is the 1-based physical line number within the offending file
    (comment and blank lines count, so the number matches a text editor).
    """

    def __init__(self, message: str, row: int | None = None, path=None):
        self.row = row
        self.path = path
        where = ""
        if path is not None:
            where += f"{path}: "
        if row is not None:
            where += f"row {row}: "
        super().__init__(where + message)


class DuplicateIdError(ParseError):
    """Two state rows share the same id."""


class DataError(CoolcycleError):
    """A parsed value violates a physical constraint (A <= 0, E_up <= E_low, ...)."""


class IntegrityError(CoolcycleError):
    """A transition references a state id that does not exist."""

"""Exception hierarchy shared across the package.

Every error raised on a user-facing path derives from HomotestError so the
CLI can map failures to exit codes without pattern-matching messages.
"""


class HomotestError(Exception):
    """Base class for all package errors."""


class ParseError(HomotestError):
    """Malformed edge-list or label input.

    Carries the offending 1-based line number when known.
    """

    def __init__(self, message: str, line: int | None = None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


class ValidationError(HomotestError):
    """Arguments or configuration outside the documented domain."""


class AssignmentError(HomotestError):
    """Community assignment unusable for the homophily statistic.

    Raised when an assignment has a single community, or when it induces
    no within-community pairs (all singletons), so the within/between
    contrast is undefined.
    """


class DegenerateInputError(HomotestError):
    """Graph or matrix on which the statistic is undefined (e.g. no edges)."""


class SearchSpaceError(HomotestError):
    """Exhaustive enumeration refused because the search space is too large."""

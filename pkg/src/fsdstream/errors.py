"""Exception hierarchy shared by the library and the CLI.

The CLI maps these onto process exit codes: validation failures exit 1,
missing files or resources exit 2, violated internal invariants exit 3.
"""


class FsdError(Exception):
    """Base class for all errors raised by this package."""

    exit_code = 1


class ValidationError(FsdError):
    """Bad input: malformed records, out-of-range parameters, contract violations."""

    exit_code = 1


class MissingResourceError(FsdError):
    """A referenced file, stopword list, or other resource does not exist."""

    exit_code = 2


class InternalError(FsdError):
    """An internal invariant was violated; indicates a bug, not bad input."""

    exit_code = 3

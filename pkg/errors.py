"""
Exception types shared by the library modules and mapped to CLI exit codes.
"""


class RangeTooLargeError(ValueError):
    """A requested table or scan exceeds the configured memory ceiling."""


class TableRangeError(ValueError):
    """A query reaches outside the interval covered by a PrimeTable."""


class InvariantViolation(RuntimeError):
    """An internal consistency check failed; results must not be trusted."""


EXIT_OK = 0
EXIT_USAGE = 2
EXIT_RESOURCE = 3
EXIT_INVARIANT = 4


def exit_status_for(error):
    if isinstance(error, RangeTooLargeError):
        return EXIT_RESOURCE
    if isinstance(error, InvariantViolation):
        return EXIT_INVARIANT
    if isinstance(error, ValueError):
        return EXIT_USAGE
    return EXIT_INVARIANT

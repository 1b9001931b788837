"""Exception types shared by the package; the CLI maps them to exit codes."""


class CoversError(Exception):
    exit_code = 1


class InputError(CoversError, ValueError):
    """Malformed or infeasible input."""

    exit_code = 3


class InvariantViolation(CoversError, AssertionError):
    """An internal consistency check failed."""

    exit_code = 4


class CacheMismatch(CoversError):
    """A cache file was written by a different code version or for other parameters."""

    exit_code = 3

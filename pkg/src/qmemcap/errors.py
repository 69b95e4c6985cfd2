"""Exception hierarchy shared by all modules.

Each class carries the CLI exit code it maps to.
"""


class QmemcapError(Exception):
    exit_code = 1


class InputError(QmemcapError, ValueError):
    """Malformed or inconsistent input (dimensions, probabilities, parse errors)."""

    exit_code = 2


class IdenticalBranchError(InputError):
    """Two branches of a mixture cannot be told apart by any probe state."""


class NumericalError(QmemcapError, ArithmeticError):
    exit_code = 3


class DomainError(NumericalError, ValueError):
    """Argument outside the domain of a matrix function (e.g. log of a negative operator)."""


class BoundNotReachedError(QmemcapError):
    """An incremental search hit its limit before reaching the requested target."""

    exit_code = 4

    def __init__(self, message, best=None, at=None):
        super().__init__(message)
        self.best = best
        self.at = at


class SizeLimitError(QmemcapError, MemoryError):
    """A materialized matrix would exceed the configured dimension cap."""

    exit_code = 5

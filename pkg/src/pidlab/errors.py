"""Exception hierarchy shared by every pidlab module."""


class PidlabError(Exception):
    """Base class for all pidlab errors."""


class InvalidInputError(PidlabError, ValueError):
    """Shapes, values or configuration rejected before any computation."""


class NumericalFailure(PidlabError, ArithmeticError):
    """An iterative or direct solver failed to produce a trustworthy answer.

    ``residual`` carries the last measured residual when one is available.
    """

    def __init__(self, message, residual=None):
        super().__init__(message)
        self.residual = residual


class DivergenceError(NumericalFailure):
    """An integrated state became non-finite or exceeded the blow-up threshold."""

    def __init__(self, message, time):
        super().__init__(message)
        self.time = time

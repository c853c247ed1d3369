"""Exception types shared across the package.

The CLI maps these classes onto exit codes, so operations should raise the
most specific one that applies.
"""


class ParameterError(ValueError):
    """A parameter is outside the range an operation supports."""


class DataError(ValueError):
    """Input data is malformed: non-finite entries, asymmetric file, ..."""


class SizeError(ValueError):
    """An exact-computation guard (enumeration size, dense cap) was exceeded."""


class GuaranteeError(AssertionError):
    """A mathematical guarantee that is asserted by an operation failed."""


class NonConvergenceError(RuntimeError):
    """An iterative solver ran out of iterations.

    ``best`` carries the best estimate available at abort time (a NormResult
    or NormEstimate, depending on the caller).
    """

    def __init__(self, message, best=None):
        super().__init__(message)
        self.best = best

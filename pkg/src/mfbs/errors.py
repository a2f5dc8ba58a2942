"""Exception hierarchy shared by every module.

Validation problems (bad inputs, out-of-domain arguments) derive from
``ValueError``; numerical failures derive from ``RuntimeError``.  The CLI maps
the former to exit status 2 and the latter to exit status 1.
"""


class DomainError(ValueError):
    """An argument lies outside the domain of the operation."""


class ParseError(DomainError):
    """A quote or Hurst-table file is malformed."""

    def __init__(self, message, line=None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


class EmptyInputError(DomainError):
    """An input file contained no data rows."""


class NumericalError(RuntimeError):
    """A numerical routine failed to produce a trustworthy answer."""


class IllConditionedKernelError(NumericalError):
    """Cholesky factorization failed even at the largest allowed jitter."""

    def __init__(self, times, min_eigenvalue, jitter):
        self.times = times
        self.min_eigenvalue = min_eigenvalue
        self.jitter = jitter
        super().__init__(
            f"covariance matrix on {len(times)}-point grid "
            f"[{times[0]:.6g}, ..., {times[-1]:.6g}] is not positive definite "
            f"after jitter {jitter:.0e} (min eigenvalue {min_eigenvalue:.3e})"
        )


class SingularPointError(DomainError):
    """The drift factor diverges at t = 0 when h(0) < 1/2."""


class CalibrationError(NumericalError):
    """No optimizer restart converged; ``best`` holds the best-so-far result."""

    def __init__(self, message, best=None):
        self.best = best
        super().__init__(message)

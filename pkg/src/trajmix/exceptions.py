"""Exception types shared across the toolkit.

Validation problems (bad shapes, out-of-range arguments, malformed files)
raise plain ``ValueError``; the classes below mark failures of the numerical
machinery itself.  The CLI maps ``ValueError`` to exit code 2 and
``NumericalError`` to exit code 3.
"""


class NumericalError(RuntimeError):
    """A numerical operation failed (singular system, degenerate model, ...)."""


class DegenerateCovarianceError(NumericalError):
    """A covariance matrix is singular even after diagonal regularization."""


class SingularSystemError(NumericalError):
    """A linear system is rank deficient and no ridge term was requested."""


class FarFromSupportError(NumericalError):
    """A query point lies so far from a mixture's support that every
    component's input density underflows.

    Attributes
    ----------
    max_log_density : float
        The largest per-component input log-density observed at the query,
        so the caller can decide how to proceed.
    """

    def __init__(self, message, max_log_density):
        super().__init__(message)
        self.max_log_density = float(max_log_density)

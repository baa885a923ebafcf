"""Exception types shared across the package."""


class ValidationError(ValueError):
    """Invalid argument, malformed input data, or broken invariant."""


class NumericalError(RuntimeError):
    """Numerical failure (Cholesky breakdown, non-finite objective, ...).

    Carries an optional ``state`` dict with a diagnostic dump of the values
    that triggered the failure.
    """

    def __init__(self, message, state=None):
        super().__init__(message)
        self.state = state or {}

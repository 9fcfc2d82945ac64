"""Exception hierarchy."""


class StableCVError(Exception):
    pass


class FoldError(StableCVError, ValueError):
    """Invalid fold parameters (k < 2, n not divisible by k, ...)."""


class FitError(StableCVError):
    """A learner could not be trained.  ``fold`` is set when raised by an estimator."""

    def __init__(self, message, fold=None):
        super().__init__(message)
        self.fold = fold


class SingularSystemError(FitError):
    """Cholesky met a non-positive pivot; no jitter is added."""

    def __init__(self, message, pivot=None, fold=None):
        super().__init__(message, fold=fold)
        self.pivot = pivot


class DataError(StableCVError, ValueError):
    def __init__(self, message, row=None, column=None):
        super().__init__(message)
        self.row = row
        self.column = column


class OracleError(StableCVError):
    pass


class ConstructionError(StableCVError, ValueError):
    """Counterexample parameters violate the construction's requirements."""

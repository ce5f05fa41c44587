"""Exception hierarchy shared across the package."""


class ArgmaxLabError(Exception):
    """Base class for all package errors."""


class DimensionError(ArgmaxLabError, ValueError):
    pass


class DesignError(ArgmaxLabError, ValueError):
    """A design or set specification violates its invariants."""


class InfeasibleError(ArgmaxLabError):
    pass


class IterationLimitError(ArgmaxLabError):
    def __init__(self, message, diagnostics=None):
        super().__init__(message)
        self.diagnostics = diagnostics or {}


class SingularDesignError(ArgmaxLabError):
    def __init__(self, k, message=None):
        super().__init__(message or f"singular design matrix at candidate break k={k}")
        self.k = k


class GridRangeError(ArgmaxLabError, ValueError):
    def __init__(self, message, clipped=()):
        super().__init__(message)
        self.clipped = tuple(clipped)


class ProfileGridError(ArgmaxLabError):
    """The profile grid missed a better local maximum."""


class EmptyConstraintError(ArgmaxLabError, ValueError):
    pass

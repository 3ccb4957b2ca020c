"""Exception types shared across the package."""


class MiniBucketError(Exception):
    """Base class for all errors raised by this package."""


class ModelError(MiniBucketError, ValueError):
    """A factor, network, ordering or evidence set violates its invariants."""


class ResourceLimitError(MiniBucketError, MemoryError):
    """A table or search frontier would exceed the configured size cap.

    ``best_lower`` carries the best lower bound known when the limit was hit,
    if the caller had one.
    """

    def __init__(self, message, cells=None, cap=None, best_lower=None):
        super().__init__(message)
        self.cells = cells
        self.cap = cap
        self.best_lower = best_lower


class InfeasibleConfigError(MiniBucketError, ValueError):
    """An (i, m) configuration cannot partition some bucket."""


class OrderingError(ModelError):
    """An ordering is not a permutation or violates a task precondition."""


class BudgetExceededError(MiniBucketError):
    """The brute-force oracle was asked to enumerate too many states."""


class ParseError(MiniBucketError, ValueError):
    def __init__(self, message, line, column=1):
        super().__init__(f"line {line}, column {column}: {message}")
        self.line = line
        self.column = column

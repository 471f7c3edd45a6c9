"""Exception types shared across the package."""


class GridError(ValueError):
    """Dimension or basis mismatch between grids, fields, or matrices."""


class ConjugacyError(GridError):
    """A spectral transform was requested on non-conjugate grid axes."""


class ResolutionError(ValueError):
    """Grid or basis too coarse/small to resolve the requested object."""


class ConditioningError(ArithmeticError):
    """Matrix too close to singular for a spectral decomposition."""


class TruncationError(ValueError):
    """Series truncation bound violated; carries a suggested size."""

    def __init__(self, message, suggested_size=None):
        super().__init__(message)
        self.suggested_size = suggested_size


class StepSizeError(ValueError):
    """Time stepper outside its stability bound."""


class ResolutionWarning(UserWarning):
    """Result computed, but the sampling window limits what it can resolve."""

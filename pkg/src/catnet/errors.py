"""Exception types shared across the package."""
import numpy as np


class CatnetError(Exception):
    """Base class for recoverable numerical failures in this package."""


class SingularDesignError(CatnetError, np.linalg.LinAlgError):
    """Design matrix is rank deficient where a unique fit is required."""


class DegenerateNoiseError(CatnetError, ValueError):
    """Mirror noise vector has (numerically) no energy after projection."""


class LassoConvergenceError(CatnetError, RuntimeError):
    """Coordinate descent hit the sweep limit; carries the last iterate."""

    def __init__(self, message, fit=None):
        super().__init__(message)
        self.fit = fit


class DivergenceError(CatnetError, RuntimeError):
    """Training loss became non-finite; carries the offending epoch."""

    def __init__(self, epoch: int):
        super().__init__(f"non-finite training loss at epoch {epoch}")
        self.epoch = epoch


class DegenerateAbscissaError(CatnetError, ValueError):
    """All abscissa values identical; smoothing slope is undefined."""


class DegenerateProfileError(CatnetError, ValueError):
    """Dependence profile is flat (or an input series is constant)."""


class TooManyFeaturesError(CatnetError, ValueError):
    """Exact coalition enumeration requested above the feature cap."""


class NoSelectionError(CatnetError, ValueError):
    """No statistic reaches the requested threshold."""


class ConfigError(CatnetError, ValueError):
    """Invalid run configuration."""

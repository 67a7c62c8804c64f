"""Smoothed derivative importance from an attribution scatter.

An attribution value per sample is noisy; the informative quantity is how
the attribution moves with the feature value.  We smooth the scatter with
LOWESS and take finite-difference slopes of the smoothed curve, which for
a linear predictor recovers its coefficient at every sample.
"""
from __future__ import annotations

from dataclasses import dataclass
from math import ceil

import numpy as np

from . import kernels
from .errors import DegenerateAbscissaError

DEFAULT_FRAC = 0.3
DEFAULT_ITERS = 2


@dataclass
class ImportanceVector:
    values: np.ndarray
    feature_id: int = -1
    sign: str = "plain"  # "plus" | "minus" | "plain"


def _smooth_sorted(xs: np.ndarray, ys: np.ndarray, frac: float, iters: int) -> np.ndarray:
    n = len(xs)
    r = min(max(int(ceil(frac * n)), 2), n)
    return kernels.lowess_fit(xs, ys, r, iters)


def lowess_smooth(x, phi, frac: float = DEFAULT_FRAC, iters: int = DEFAULT_ITERS) -> np.ndarray:
    """Locally weighted linear smoothing of phi against x.

    Uses tricube weights over the ceil(frac*n) nearest neighbours and
    `iters` bisquare robustifying passes.  Output is aligned with the
    input order.
    """
    x = np.asarray(x, dtype=np.float64)
    phi = np.asarray(phi, dtype=np.float64)
    if x.shape != phi.shape or x.ndim != 1 or len(x) < 3:
        raise ValueError("x and phi must be equal-length vectors with >= 3 entries")
    if not 0.0 < frac <= 1.0:
        raise ValueError("frac must lie in (0, 1]")
    if np.ptp(x) == 0.0:
        raise DegenerateAbscissaError("all abscissa values identical")
    order = np.argsort(x, kind="stable")
    fitted = _smooth_sorted(x[order], phi[order], frac, iters)
    out = np.empty_like(fitted)
    out[order] = fitted
    return out


def importance_vector(x_j, phi_j, frac: float = DEFAULT_FRAC, iters: int = DEFAULT_ITERS,
                      feature_id: int = -1, sign: str = "plain") -> ImportanceVector:
    """Per-sample slope of the smoothed attribution curve.

    Sorts by x_j, smooths, averages smoothed values at tied abscissae,
    differentiates by central differences (one-sided at the extremes), and
    returns the slopes in the original sample order.
    """
    x_j = np.asarray(x_j, dtype=np.float64)
    phi_j = np.asarray(phi_j, dtype=np.float64)
    if x_j.shape != phi_j.shape or x_j.ndim != 1 or len(x_j) < 3:
        raise ValueError("x_j and phi_j must be equal-length vectors with >= 3 entries")
    if np.ptp(x_j) == 0.0:
        raise DegenerateAbscissaError("all abscissa values identical")

    order = np.argsort(x_j, kind="stable")
    xs = x_j[order]
    fitted = _smooth_sorted(xs, phi_j[order], frac, iters)

    xu, inv = np.unique(xs, return_inverse=True)
    counts = np.bincount(inv)
    su = np.bincount(inv, weights=fitted) / counts
    m = len(xu)

    slopes_u = np.empty(m)
    slopes_u[0] = (su[1] - su[0]) / (xu[1] - xu[0])
    slopes_u[-1] = (su[-1] - su[-2]) / (xu[-1] - xu[-2])
    if m > 2:
        slopes_u[1:-1] = (su[2:] - su[:-2]) / (xu[2:] - xu[:-2])

    out = np.empty(len(x_j))
    out[order] = slopes_u[inv]
    return ImportanceVector(values=out, feature_id=feature_id, sign=sign)

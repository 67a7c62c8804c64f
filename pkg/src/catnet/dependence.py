"""Kernel dependence between mirror candidates and the scale minimizer.

The dependence of x + c z on x - c z is measured by HSIC at lags
0..max_lag, combined with exponentially decaying weights.  The mirror
scale c_j is the minimizer of that weighted profile, located by a cubic
spline through a logarithmic grid refined with golden-section search.
"""
from __future__ import annotations

import csv
import enum
import math
from dataclasses import dataclass, field

import numpy as np
from scipy.interpolate import CubicSpline

from .errors import DegenerateProfileError

_INV_PHI = (math.sqrt(5.0) - 1.0) / 2.0
_INV_PHI2 = (3.0 - math.sqrt(5.0)) / 2.0


class KernelKind(enum.Enum):
    LINEAR = "linear"
    RBF = "rbf"


def lag_weights(k: int) -> np.ndarray:
    """Normalized exp(-tau/10) weights for lags 0..k."""
    if k < 0:
        raise ValueError("max lag must be >= 0")
    w = np.exp(-np.arange(k + 1) / 10.0)
    return w / w.sum()


@dataclass(frozen=True)
class DependenceMeasure:
    kernel: KernelKind = KernelKind.RBF
    max_lag: int = 5
    weights: np.ndarray = field(default=None)  # defaults to lag_weights(max_lag)

    def __post_init__(self):
        w = self.weights
        if w is None:
            w = lag_weights(self.max_lag)
        else:
            w = np.asarray(w, dtype=np.float64)
            if w.shape != (self.max_lag + 1,):
                raise ValueError("weights must have length max_lag + 1")
            if np.any(w < 0) or abs(w.sum() - 1.0) > 1e-12:
                raise ValueError("weights must be non-negative and sum to 1")
        object.__setattr__(self, "weights", w)


def _kernel_matrix(a: np.ndarray, kernel: KernelKind) -> np.ndarray:
    if kernel is KernelKind.LINEAR:
        return np.outer(a, a)
    d = np.abs(a[:, None] - a[None, :])
    iu = np.triu_indices(len(a), k=1)
    sigma = max(float(np.median(d[iu])) if len(iu[0]) else 0.0, 1e-6)
    return np.exp(-(d * d) / (2.0 * sigma * sigma))


def _center(K: np.ndarray) -> np.ndarray:
    rm = K.mean(axis=0)
    return K - rm[None, :] - rm[:, None] + rm.mean()


def hsic_lagged(x, y, tau: int, kernel: KernelKind = KernelKind.RBF) -> float:
    """HSIC between x_t and y_{t-tau} on the overlapping stretch.

    Pairs (x_t, y_{t-tau}) for t = tau..n-1 give aligned series of length
    m = n - tau; the estimate is tr(HKH HLH) / (m-1)^2.  tau = 0 is plain
    HSIC.
    """
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    if x.shape != y.shape or x.ndim != 1:
        raise ValueError("x and y must be equal-length vectors")
    if tau < 0:
        raise ValueError("lag must be >= 0")
    n = len(x)
    if n <= tau + 2:
        raise ValueError(f"series of length {n} too short for lag {tau}")
    xa = x[tau:]
    ya = y[: n - tau]
    m = n - tau
    Kc = _center(_kernel_matrix(xa, kernel))
    Lc = _center(_kernel_matrix(ya, kernel))
    return float(np.sum(Kc * Lc) / (m - 1) ** 2)


def mirror_dependence(x_j, z, c: float, measure: DependenceMeasure) -> float:
    """Weighted lagged HSIC between x + c z and x - c z."""
    if c < 0:
        raise ValueError("c must be >= 0")
    x_j = np.asarray(x_j, dtype=np.float64)
    z = np.asarray(z, dtype=np.float64)
    u = x_j + c * z
    v = x_j - c * z
    total = 0.0
    for tau, w in enumerate(measure.weights):
        total += w * hsic_lagged(u, v, tau, measure.kernel)
    return total


def profile_cj(x_j, z, measure: DependenceMeasure, grid_size: int = 15):
    """Dependence profile on a log grid of scales around std(x)/std(z)."""
    x_j = np.asarray(x_j, dtype=np.float64)
    z = np.asarray(z, dtype=np.float64)
    sx = float(np.std(x_j))
    sz = float(np.std(z))
    if sx <= 0.0 or sz <= 0.0:
        raise DegenerateProfileError("constant series admits no mirror scale")
    s = sx / sz
    cs = np.geomspace(0.1 * s, 10.0 * s, grid_size)
    vals = np.array([mirror_dependence(x_j, z, c, measure) for c in cs])
    return cs, vals


def _golden_min(f, a: float, b: float, tol: float) -> float:
    h = b - a
    if h <= tol:
        return 0.5 * (a + b)
    steps = int(math.ceil(math.log(tol / h) / math.log(_INV_PHI)))
    c = a + _INV_PHI2 * h
    d = a + _INV_PHI * h
    yc, yd = f(c), f(d)
    for _ in range(steps):
        if yc < yd:
            b, d, yd = d, c, yc
            h *= _INV_PHI
            c = a + _INV_PHI2 * h
            yc = f(c)
        else:
            a, c, yc = c, d, yd
            h *= _INV_PHI
            d = a + _INV_PHI * h
            yd = f(d)
    return c if yc < yd else d


def solve_cj(x_j, z, measure: DependenceMeasure, grid_size: int = 15) -> float:
    """Mirror scale minimizing the weighted lagged dependence profile.

    Fits a cubic spline through the grid profile and refines the minimum
    around the best grid point by golden-section search on the spline.
    """
    cs, vals = profile_cj(x_j, z, measure, grid_size)
    if float(vals.max() - vals.min()) < 1e-12:
        raise DegenerateProfileError("flat dependence profile")
    spline = CubicSpline(cs, vals)
    i = int(np.argmin(vals))
    lo = cs[max(i - 1, 0)]
    hi = cs[min(i + 1, len(cs) - 1)]
    c = _golden_min(lambda t: float(spline(t)), float(lo), float(hi), tol=1e-10 * cs[-1])
    # the spline can wiggle; never return worse than the best grid point
    if float(spline(c)) > vals[i]:
        c = float(cs[i])
    return float(c)


def save_profile_csv(path, cs, vals) -> None:
    """Diagnostic dump of (c, dependence) grid points."""
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["c", "dependence"])
        for c, v in zip(cs, vals):
            writer.writerow([repr(float(c)), repr(float(v))])

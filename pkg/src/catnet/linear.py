"""Ordinary least squares, LASSO, and the closed-form mirror scale.

The mirror scale for a feature j is the positive c making the projection
residuals of x_j + c z and x_j - c z (after removing the span of the other
columns) exactly orthogonal, which kills the multicollinearity the mirror
pair would otherwise inject into a least-squares fit.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import kernels
from .errors import DegenerateNoiseError, LassoConvergenceError, SingularDesignError


@dataclass
class LinearFit:
    coef: np.ndarray
    intercept: float
    residuals: np.ndarray
    objective_trace: np.ndarray | None = None


def ols_fit(X: np.ndarray, y: np.ndarray) -> LinearFit:
    """Least-squares fit with intercept; requires n > p and full column rank."""
    X = np.asarray(X, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    n, p = X.shape
    if p >= n:
        raise ValueError(f"ols_fit needs n > p, got n={n}, p={p}")
    A = np.column_stack([np.ones(n), X])
    coef, _, rank, _ = np.linalg.lstsq(A, y, rcond=None)
    if rank < p + 1:
        raise SingularDesignError(f"design rank {rank} < {p + 1}")
    fitted = A @ coef
    return LinearFit(coef=coef[1:], intercept=float(coef[0]), residuals=y - fitted)


def _project_out(A: np.ndarray | None, v: np.ndarray) -> np.ndarray:
    """Residual of v after projecting onto the column space of A."""
    if A is None or A.shape[1] == 0:
        return v.copy()
    coef, _, _, _ = np.linalg.lstsq(A, v, rcond=None)
    return v - A @ coef


def analytic_cj(X: np.ndarray, j: int, z: np.ndarray) -> float:
    """Closed-form mirror scale sqrt(x'Px / z'Pz) with P the projection
    complement of the remaining columns."""
    X = np.asarray(X, dtype=np.float64)
    z = np.asarray(z, dtype=np.float64)
    n, p = X.shape
    if not 0 <= j < p:
        raise ValueError(f"feature index {j} out of range for p={p}")
    if p > 1 and n <= p:
        raise ValueError(f"analytic mirror scale needs n > p, got n={n}, p={p}")
    others = np.delete(X, j, axis=1) if p > 1 else None
    px = _project_out(others, X[:, j])
    pz = _project_out(others, z)
    num = float(px @ px)
    den = float(pz @ pz)
    if den <= 1e-12 * max(1.0, float(z @ z)):
        raise DegenerateNoiseError("noise vector lies in the span of the other columns")
    return float(np.sqrt(num / den))


def _standardize(X: np.ndarray):
    mu = X.mean(axis=0)
    Xc = X - mu
    sd = np.sqrt((Xc**2).mean(axis=0))
    sd_safe = np.where(sd > 0.0, sd, 1.0)
    return Xc / sd_safe, mu, sd_safe


def lasso_fit(X: np.ndarray, y: np.ndarray, lam: float,
              tol: float = 1e-7, max_sweeps: int = 10_000) -> LinearFit:
    """Coordinate-descent minimizer of (1/2n)||y - Xb||^2 + lam ||b||_1.

    Columns are standardized internally; coefficients come back on the
    original scale.  Raises LassoConvergenceError (carrying the iterate)
    if the sweep limit is hit.
    """
    if lam < 0:
        raise ValueError("lam must be non-negative")
    X = np.asarray(X, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    n, p = X.shape
    Xs, mu, sd = _standardize(X)
    ybar = y.mean()
    yc = y - ybar
    beta = np.zeros(p)
    nsweeps, converged, obj = kernels.lasso_cd(
        np.ascontiguousarray(Xs.T), yc, float(lam), beta, tol, max_sweeps
    )
    coef = beta / sd
    fit = LinearFit(
        coef=coef,
        intercept=float(ybar - coef @ mu),
        residuals=y - (X @ coef + (ybar - coef @ mu)),
        objective_trace=obj[:nsweeps].copy(),
    )
    if not converged:
        raise LassoConvergenceError(f"no convergence after {max_sweeps} sweeps", fit=fit)
    return fit


def _lasso_path(Xs: np.ndarray, yc: np.ndarray, lams: np.ndarray,
                tol: float = 1e-7, max_sweeps: int = 10_000) -> np.ndarray:
    """Warm-started solutions on a descending lam grid (standardized scale)."""
    p = Xs.shape[1]
    XsT = np.ascontiguousarray(Xs.T)
    beta = np.zeros(p)
    out = np.empty((len(lams), p))
    for i, lam in enumerate(lams):
        kernels.lasso_cd(XsT, yc, float(lam), beta, tol, max_sweeps)
        out[i] = beta
    return out


def lambda_max(X: np.ndarray, y: np.ndarray) -> float:
    """Smallest penalty that zeroes every coefficient (standardized scale)."""
    Xs, _, _ = _standardize(np.asarray(X, dtype=np.float64))
    yc = y - np.mean(y)
    return float(np.max(np.abs(Xs.T @ yc)) / len(y))


def lasso_preselect(X: np.ndarray, y: np.ndarray, n_folds: int = 5,
                    n_lambdas: int = 50, eps: float = 1e-3) -> np.ndarray:
    """Support of the LASSO fit at the lam minimizing 5-fold CV error.

    Folds are contiguous blocks over the (time-ordered) rows.  Returns the
    selected feature indices; possibly empty.
    """
    X = np.asarray(X, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    n = len(y)
    lmax = lambda_max(X, y)
    if lmax <= 0.0:
        return np.array([], dtype=np.intp)
    lams = np.geomspace(lmax, lmax * eps, n_lambdas)
    bounds = np.linspace(0, n, n_folds + 1).astype(int)
    cv_err = np.zeros(n_lambdas)
    for f in range(n_folds):
        lo, hi = bounds[f], bounds[f + 1]
        mask = np.ones(n, dtype=bool)
        mask[lo:hi] = False
        Xtr, ytr = X[mask], y[mask]
        Xva, yva = X[lo:hi], y[lo:hi]
        Xs, mu, sd = _standardize(Xtr)
        ytr_bar = ytr.mean()
        betas = _lasso_path(Xs, ytr - ytr_bar, lams)
        coefs = betas / sd
        pred = Xva @ coefs.T + (ytr_bar - coefs @ mu)
        cv_err += ((pred - yva[:, None]) ** 2).mean(axis=0)
    best = lams[int(np.argmin(cv_err))]
    fit = lasso_fit(X, y, best)
    return np.flatnonzero(fit.coef != 0.0)

"""Shapley-value attribution with background-marginalized value functions.

The value of a coalition is the mean model output with coalition features
held at the observed sample and the rest replaced by background rows,
minus the mean output over the background.  Exact attribution enumerates
all coalitions (feasible up to 12 features); the Monte-Carlo estimator
samples feature orderings and assigns each feature its marginal
contribution along the ordering walk.

Samples may be flat vectors (p,) or lookback windows (k, p); features are
always the trailing-axis columns, so replacing an absent feature in a
window swaps the whole column across the lookback.
"""
from __future__ import annotations

import csv
import math
import os
from dataclasses import dataclass

import numpy as np

from .errors import TooManyFeaturesError
from .rng import substream

EXACT_MAX_FEATURES = 12


@dataclass(frozen=True)
class Background:
    """Reference samples used to marginalize absent features."""

    rows: np.ndarray  # (B, p) or (B, k, p)

    def __post_init__(self):
        rows = np.asarray(self.rows, dtype=np.float64)
        if rows.ndim < 2 or rows.shape[0] == 0:
            raise ValueError("background needs at least one row")
        object.__setattr__(self, "rows", rows)

    @classmethod
    def subsample(cls, samples: np.ndarray, size: int, seed: int) -> "Background":
        samples = np.asarray(samples, dtype=np.float64)
        n = samples.shape[0]
        take = min(size, n)
        idx = np.sort(substream(seed, "background").choice(n, size=take, replace=False))
        return cls(rows=samples[idx])


@dataclass
class ShapMatrix:
    values: np.ndarray  # (features, samples)
    baseline: float

    def to_csv(self, path: str | os.PathLike) -> None:
        with open(path, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(["feature"] + [str(i) for i in range(self.values.shape[1])])
            for j, row in enumerate(self.values):
                writer.writerow([j] + [repr(float(v)) for v in row])


def _eval_chunked(model, samples: np.ndarray, chunk: int = 1 << 15) -> np.ndarray:
    n = samples.shape[0]
    if n <= chunk:
        return np.asarray(model(samples), dtype=np.float64)
    parts = [
        np.asarray(model(samples[i : i + chunk]), dtype=np.float64)
        for i in range(0, n, chunk)
    ]
    return np.concatenate(parts)


def baseline_value(model, bg: Background) -> float:
    return float(np.mean(_eval_chunked(model, bg.rows)))


def exact_shap(model, x: np.ndarray, bg: Background) -> np.ndarray:
    """Exact coalition enumeration; requires at most 12 features.

    model must accept a stacked batch of samples and return one output per
    sample.
    """
    x = np.asarray(x, dtype=np.float64)
    p = x.shape[-1]
    if p > EXACT_MAX_FEATURES:
        raise TooManyFeaturesError(
            f"{p} features exceeds the exact enumeration cap of "
            f"{EXACT_MAX_FEATURES}; use mc_shap instead"
        )
    rows = bg.rows
    nmask = 1 << p
    bits = (np.arange(nmask)[:, None] >> np.arange(p)[None, :]) & 1  # (2^p, p)
    masks = bits.astype(bool)

    # all coalition mixtures against every background row, one model sweep
    if x.ndim == 1:
        mixed = np.where(masks[:, None, :], x[None, None, :], rows[None, :, :])
    else:
        mixed = np.where(masks[:, None, None, :], x[None, None, :, :], rows[None, :, :, :])
    outs = _eval_chunked(model, mixed.reshape((-1,) + x.shape))
    v = outs.reshape(nmask, rows.shape[0]).mean(axis=1)
    v = v - v[0]  # v(empty set) = 0

    pc = np.array([int(m).bit_count() for m in range(nmask)])
    fact = np.array([math.factorial(i) for i in range(p + 1)], dtype=np.float64)
    w = fact[pc] * fact[p - pc - 1] / fact[p]  # weight of coalition S not containing j

    phi = np.zeros(p)
    for j in range(p):
        bit = 1 << j
        without = np.flatnonzero((np.arange(nmask) & bit) == 0)
        phi[j] = float(np.sum(w[without] * (v[without | bit] - v[without])))
    return phi


def _permutation_walk(model, x: np.ndarray, bg: Background, K: int,
                      rng: np.random.Generator, rows_per_perm: int | None,
                      chunk_rows: int = 1 << 15) -> np.ndarray:
    p = x.shape[-1]
    rows = bg.rows
    B = rows.shape[0]
    perms = np.argsort(rng.random((K, p)), axis=1)
    if rows_per_perm is None:
        refs = np.broadcast_to(rows, (K,) + rows.shape)
        R = B
    else:
        idx = rng.integers(0, B, size=(K, rows_per_perm))
        refs = rows[idx]
        R = rows_per_perm

    # masks[k, s] = coalition after s steps of permutation k
    masks = np.zeros((K, p + 1, p), dtype=bool)
    for s in range(p):
        masks[:, s + 1] = masks[:, s]
        masks[np.arange(K), s + 1, perms[:, s]] = True

    phi = np.zeros(p)
    # chunk over permutations to bound the staged batch size
    per_perm = (p + 1) * R
    kstep = max(1, chunk_rows // per_perm)
    for lo in range(0, K, kstep):
        hi = min(lo + kstep, K)
        mk = masks[lo:hi]          # (kc, p+1, p)
        rf = refs[lo:hi]           # (kc, R, ...)
        if x.ndim == 1:
            mixed = np.where(mk[:, :, None, :], x, rf[:, None, :, :])
        else:
            mixed = np.where(mk[:, :, None, None, :], x, rf[:, None, :, :, :])
        outs = _eval_chunked(model, mixed.reshape((-1,) + x.shape), chunk=chunk_rows)
        v = outs.reshape(hi - lo, p + 1, R).mean(axis=2)
        diffs = v[:, 1:] - v[:, :-1]  # (kc, p)
        np.add.at(phi, perms[lo:hi].ravel(), diffs.ravel())
    return phi / K


def mc_shap(model, x: np.ndarray, bg: Background, K: int, seed: int,
            rows_per_perm: int | None = None) -> np.ndarray:
    """Monte-Carlo attribution over K sampled feature orderings.

    With rows_per_perm=None each coalition value marginalizes over the
    whole background, so the only sampling noise is over orderings (and a
    linear model is attributed exactly for any K >= 1).  An integer
    rows_per_perm instead pairs each ordering with that many background
    draws, trading exact marginalization for speed.
    """
    if K < 1:
        raise ValueError("K must be >= 1")
    x = np.asarray(x, dtype=np.float64)
    return _permutation_walk(model, x, bg, K, substream(seed, "mc_shap"), rows_per_perm)


def shap_matrix(model, samples: np.ndarray, bg: Background, K: int, seed: int,
                rows_per_perm: int | None = None, method: str = "auto") -> ShapMatrix:
    """Attribution matrix (features x samples).

    method="auto" enumerates exactly when the feature count allows it and
    falls back to the Monte-Carlo estimator otherwise; "exact" and "mc"
    force a path.  Per-sample RNG substreams keyed by (seed, sample) make
    the result independent of evaluation order.
    """
    samples = np.asarray(samples, dtype=np.float64)
    n = samples.shape[0]
    p = samples.shape[-1]
    if method not in ("auto", "exact", "mc"):
        raise ValueError(f"unknown method {method!r}")
    exact = method == "exact" or (method == "auto" and p <= EXACT_MAX_FEATURES)
    values = np.empty((p, n))
    for i in range(n):
        if exact:
            values[:, i] = exact_shap(model, samples[i], bg)
        else:
            rng = substream(seed, "sample", i)
            values[:, i] = _permutation_walk(model, samples[i], bg, K, rng, rows_per_perm)
    return ShapMatrix(values=values, baseline=baseline_value(model, bg))

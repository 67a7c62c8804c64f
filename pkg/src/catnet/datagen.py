"""Simulated regression designs with known ground truth.

Two design families:

* i.i.d. Gaussian columns with an equicorrelated block over the relevant
  features (linear experiments);
* random-walk relevant columns with i.i.d. standard-normal null columns
  (sequence experiments), where the stored response is the pre-link
  linear signal.

Responses are linear in the design plus unit Gaussian noise.  A link
function can be applied to the pre-link signal afterwards.
"""
from __future__ import annotations

import csv
import enum
import json
import math
import os
from dataclasses import dataclass, field

import numpy as np

from .rng import substream


class LinkKind(enum.Enum):
    LINEAR = "linear"
    SIN_EXP = "sin_exp"
    ARCSIN = "arcsin"


@dataclass(frozen=True)
class GroundTruth:
    """True coefficient vector; support sets derive from it."""

    beta: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "beta", np.asarray(self.beta, dtype=np.float64))

    @property
    def support(self) -> np.ndarray:
        return np.flatnonzero(self.beta != 0.0)

    @property
    def null_set(self) -> np.ndarray:
        return np.flatnonzero(self.beta == 0.0)


@dataclass(frozen=True)
class Dataset:
    """Feature matrix (rows ordered by time) with response vector."""

    X: np.ndarray
    y: np.ndarray
    truth: GroundTruth | None = None

    def __post_init__(self):
        X = np.asarray(self.X, dtype=np.float64)
        y = np.asarray(self.y, dtype=np.float64)
        if X.ndim != 2:
            raise ValueError("X must be a 2-d matrix")
        if y.shape != (X.shape[0],):
            raise ValueError("y length must equal the number of rows of X")
        if not np.all(np.isfinite(X)) or not np.all(np.isfinite(y)):
            raise ValueError("dataset entries must be finite")
        object.__setattr__(self, "X", X)
        object.__setattr__(self, "y", y)

    @property
    def n(self) -> int:
        return self.X.shape[0]

    @property
    def p(self) -> int:
        return self.X.shape[1]


def _coef_scale(p: int, n: int) -> float:
    # natural log; scale grows with dimension, shrinks with sample size
    return 20.0 * math.sqrt(math.log(max(p, 2)) / n)


def _draw_truth(p: int, n: int, k: int, seed: int) -> GroundTruth:
    support = np.sort(substream(seed, "support").choice(p, size=k, replace=False))
    beta = np.zeros(p)
    if k:
        beta[support] = _coef_scale(p, n) * substream(seed, "beta").standard_normal(k)
    return GroundTruth(beta=beta)


def gen_linear_design(p: int, n: int, k: int, corr: float, seed: int) -> Dataset:
    """Gaussian design with equicorrelated relevant block, y = X beta + eps.

    Each column draws from its own substream keyed by (seed, column), so
    regeneration is deterministic and column-parallel safe.  The k relevant
    columns share a common factor giving pairwise correlation ``corr``;
    null columns are independent.
    """
    if k > p:
        raise ValueError(f"k={k} exceeds p={p}")
    if n < 2:
        raise ValueError(f"need n >= 2, got {n}")
    if not 0.0 <= corr < 1.0:
        raise ValueError(f"corr must lie in [0, 1), got {corr}")

    truth = _draw_truth(p, n, k, seed)
    relevant = set(truth.support.tolist())
    common = substream(seed, "common").standard_normal(n)
    X = np.empty((n, p))
    for j in range(p):
        e = substream(seed, "column", j).standard_normal(n)
        if j in relevant and corr > 0.0:
            X[:, j] = math.sqrt(corr) * common + math.sqrt(1.0 - corr) * e
        else:
            X[:, j] = e
    eps = substream(seed, "noise").standard_normal(n)
    y = X @ truth.beta + eps
    return Dataset(X=X, y=y, truth=truth)


def gen_brownian_design(p: int, n: int, k: int, seed: int) -> Dataset:
    """Random-walk relevant columns, i.i.d. N(0,1) null columns.

    Relevant columns start at N(0,1) and accumulate unit-normal
    increments.  The stored y is the pre-link signal z = X beta + eps.
    """
    if k > p:
        raise ValueError(f"k={k} exceeds p={p}")
    if n < 1:
        raise ValueError(f"need n >= 1, got {n}")

    truth = _draw_truth(p, n, k, seed)
    relevant = set(truth.support.tolist())
    X = np.empty((n, p))
    for j in range(p):
        draws = substream(seed, "column", j).standard_normal(n)
        X[:, j] = np.cumsum(draws) if j in relevant else draws
    eps = substream(seed, "noise").standard_normal(n)
    z = X @ truth.beta + eps
    return Dataset(X=X, y=z, truth=truth)


def apply_link(z: np.ndarray, link: LinkKind) -> np.ndarray:
    """Elementwise response link applied to the pre-link signal."""
    z = np.asarray(z, dtype=np.float64)
    if link is LinkKind.LINEAR:
        return z.copy()
    if link is LinkKind.SIN_EXP:
        return np.sin(z / 100.0) * np.exp((z + 2.0) / 500.0)
    if link is LinkKind.ARCSIN:
        return 10.0 * np.arcsin(np.sin(z / 100.0))
    raise ValueError(f"unknown link {link!r}")


# ---------------------------------------------------------------------------
# serialization: CSV with header t,x1..xp,y plus a truth sidecar JSON


def _fmt(v: float) -> str:
    # shortest round-trip repr keeps files byte-stable across reruns
    return repr(float(v))


def save_dataset_csv(data: Dataset, path: str | os.PathLike) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["t"] + [f"x{j + 1}" for j in range(data.p)] + ["y"])
        for t in range(data.n):
            writer.writerow([t] + [_fmt(v) for v in data.X[t]] + [_fmt(data.y[t])])


def load_dataset_csv(path: str | os.PathLike) -> Dataset:
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if not header or header[0] != "t" or header[-1] != "y":
            raise ValueError(f"{path}: expected header t,x1..xp,y")
        p = len(header) - 2
        X, y = [], []
        for lineno, row in enumerate(reader, start=2):
            if len(row) != p + 2:
                raise ValueError(f"{path}: row {lineno} has {len(row)} fields, expected {p + 2}")
            X.append([float(v) for v in row[1:-1]])
            y.append(float(row[-1]))
    return Dataset(X=np.asarray(X), y=np.asarray(y))


def save_truth_json(truth: GroundTruth, path: str | os.PathLike) -> None:
    payload = {
        "beta": [float(b) for b in truth.beta],
        "support": [int(j) for j in truth.support],
    }
    with open(path, "w") as fh:
        json.dump(payload, fh, sort_keys=True)
        fh.write("\n")


def load_truth_json(path: str | os.PathLike) -> GroundTruth:
    with open(path) as fh:
        payload = json.load(fh)
    return GroundTruth(beta=np.asarray(payload["beta"], dtype=np.float64))

"""Mirror pairs, the vector signed-max statistic, and FDR thresholding.

A feature's mirror pair perturbs it symmetrically with scaled Gaussian
noise.  Agreement of the two perturbed copies' importance vectors is
summarized by a statistic that is symmetric about zero for null features
and large positive for real ones; the selection threshold is the smallest
cutoff whose estimated false discovery proportion stays within the target
level.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .datagen import GroundTruth
from .errors import NoSelectionError

DEGENERATE_NORM = 1e-12


@dataclass(frozen=True)
class MirrorPair:
    feature: int
    z: np.ndarray
    c: float
    x_plus: np.ndarray
    x_minus: np.ndarray


def make_mirror(x_j, z, c: float, feature: int = -1) -> MirrorPair:
    """Perturbed pair (x + c z, x - c z); requires a positive scale."""
    if c <= 0.0:
        raise ValueError(f"mirror scale must be positive, got {c}")
    x_j = np.asarray(x_j, dtype=np.float64)
    z = np.asarray(z, dtype=np.float64)
    if x_j.shape != z.shape or x_j.ndim != 1:
        raise ValueError("x_j and z must be equal-length vectors")
    return MirrorPair(feature=feature, z=z, c=float(c),
                      x_plus=x_j + c * z, x_minus=x_j - c * z)


@dataclass
class MirrorStatistics:
    m: np.ndarray
    l1_plus: np.ndarray | None = None
    l1_minus: np.ndarray | None = None
    cosine: np.ndarray | None = None


def _vec(v) -> np.ndarray:
    return np.asarray(getattr(v, "values", v), dtype=np.float64)


def mirror_statistic(lp, lm) -> float:
    """Cosine-signed larger L1 mass of the two importance vectors.

    Equals the scalar signed-max sgn(a b) * max(|a|, |b|) on length-1
    vectors.  Returns 0 when either vector is numerically zero.
    """
    a = _vec(lp)
    b = _vec(lm)
    if a.shape != b.shape:
        raise ValueError("importance vectors must have equal length")
    na = float(np.linalg.norm(a))
    nb = float(np.linalg.norm(b))
    if na < DEGENERATE_NORM or nb < DEGENERATE_NORM:
        return 0.0
    cosine = float(a @ b) / (na * nb)
    return cosine * max(float(np.abs(a).sum()), float(np.abs(b).sum()))


def fdp_hat(m, t: float) -> float:
    """(#{M <= -t} + 1) / #{M >= t}; raises when nothing reaches t."""
    if t <= 0.0:
        raise ValueError("threshold must be positive")
    marr = _mvals(m)
    pos = int(np.count_nonzero(marr >= t))
    if pos == 0:
        raise NoSelectionError(f"no statistic at or above t={t}")
    neg = int(np.count_nonzero(marr <= -t))
    return (neg + 1) / pos


def _mvals(m) -> np.ndarray:
    return np.asarray(getattr(m, "m", m), dtype=np.float64)


@dataclass
class SelectionResult:
    q: float
    threshold: float | None
    selected: np.ndarray
    stats: MirrorStatistics
    metrics: tuple[float, float] | None = None  # (fdp, power)
    warnings: int = 0


def select_features(m, q: float) -> SelectionResult:
    """Smallest positive cutoff with estimated FDP <= q.

    Candidate cutoffs are the distinct positive magnitudes of the
    statistics (the estimate only changes there).  With no qualifying
    cutoff the selection is empty and the threshold is None.
    """
    if not 0.0 < q < 1.0:
        raise ValueError("q must lie in (0, 1)")
    stats = m if isinstance(m, MirrorStatistics) else MirrorStatistics(m=_mvals(m))
    marr = stats.m
    threshold = None
    for t in np.unique(np.abs(marr[marr != 0.0])):
        pos = int(np.count_nonzero(marr >= t))
        if pos == 0:
            continue
        neg = int(np.count_nonzero(marr <= -t))
        if (neg + 1) / pos <= q:
            threshold = float(t)
            break
    if threshold is None:
        selected = np.array([], dtype=np.intp)
    else:
        selected = np.flatnonzero(marr >= threshold)
    return SelectionResult(q=q, threshold=threshold, selected=selected, stats=stats)


def evaluate(sel: SelectionResult, truth: GroundTruth) -> tuple[float, float]:
    """(false discovery proportion, power) against known ground truth."""
    chosen = set(sel.selected.tolist())
    nulls = set(truth.null_set.tolist())
    signals = set(truth.support.tolist())
    fdp = len(chosen & nulls) / max(len(chosen), 1)
    power = len(chosen & signals) / len(signals) if signals else 1.0
    return float(fdp), float(power)

"""End-to-end selection pipelines over linear and LSTM backends.

Three drivers share the mirror/select machinery:

* ``run_catnet``   -- one backend refit per feature on its tampered design;
* ``run_scatnet``  -- all mirror pairs at once, a single backend fit on the
                      doubled design;
* ``run_gm_linear``-- scalar signed-max baseline from the two mirror
                      coefficients of a least-squares refit.

High-dimensional inputs (p >= n) are first screened with cross-validated
LASSO; features dropped by the screen keep a statistic of 0.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .datagen import Dataset
from .dependence import DependenceMeasure, KernelKind, solve_cj
from .errors import CatnetError, ConfigError
from .importance import importance_vector
from .linear import analytic_cj, lasso_preselect, ols_fit
from .lstm import TrainConfig, build_windows, lstm_train
from .mirror import MirrorStatistics, SelectionResult, evaluate, make_mirror, mirror_statistic, select_features
from .rng import child_seed, substream
from .shapley import Background, shap_matrix


@dataclass
class PipelineConfig:
    backend: str = "linear"  # "linear" | "lstm"
    q: float = 0.1
    seed: int = 0
    # attribution
    shap_permutations: int | None = None      # None -> 1 (linear), 128 (lstm)
    shap_background: int = 64
    shap_rows_per_perm: int | str | None = "auto"  # "auto" -> None (linear), 1 (lstm)
    # dependence minimizer (lstm backend)
    kernel: KernelKind = KernelKind.RBF
    max_lag: int | None = None                # None -> lookback
    dependence_grid: int = 15
    # importance smoothing
    lowess_frac: float = 0.3
    lowess_iters: int = 2
    # lstm training
    epochs: int = 200
    learning_rate: float = 1e-3
    batch_size: int = 32
    lookback: int = 5
    hidden_size: int | None = None
    patience: int = 10

    def __post_init__(self):
        if self.backend not in ("linear", "lstm"):
            raise ConfigError(f"backend must be linear or lstm, got {self.backend!r}")
        if not 0.0 < self.q < 1.0:
            raise ConfigError("q must lie in (0, 1)")

    @property
    def permutations(self) -> int:
        if self.shap_permutations is not None:
            return self.shap_permutations
        return 1 if self.backend == "linear" else 128

    @property
    def rows_per_perm(self) -> int | None:
        if self.shap_rows_per_perm == "auto":
            return None if self.backend == "linear" else 1
        return self.shap_rows_per_perm

    def measure(self) -> DependenceMeasure:
        lag = self.lookback if self.max_lag is None else self.max_lag
        return DependenceMeasure(kernel=self.kernel, max_lag=lag)


def _screen(data: Dataset, cfg: PipelineConfig) -> np.ndarray:
    # the cross-validated screen is a least-squares-path device; the
    # sequence backend handles p >= n natively
    if cfg.backend == "linear" and data.p >= data.n:
        return lasso_preselect(data.X, data.y)
    return np.arange(data.p)


def _check_linear_width(n: int, d: int) -> None:
    if d + 2 > n:
        raise ConfigError(
            f"tampered design has {d} columns but only {n} rows; "
            "a least-squares backend needs n > columns + 1"
        )


def _fit_backend(design: np.ndarray, y: np.ndarray, cfg: PipelineConfig, key: tuple):
    """Fit the configured backend on a tampered design.

    Returns (model, samples, sample_rows): `model` maps a stacked batch of
    samples to predictions, `samples` are the attribution inputs, and
    `sample_rows[:, c]` is the abscissa paired with column c's attributions.
    """
    if cfg.backend == "linear":
        fit = ols_fit(design, y)
        coef, icept = fit.coef, fit.intercept

        def model(batch):
            return batch @ coef + icept

        return model, design, design

    tc = TrainConfig(
        seed=child_seed(cfg.seed, "train", *key),
        epochs=cfg.epochs,
        learning_rate=cfg.learning_rate,
        batch_size=cfg.batch_size,
        lookback=cfg.lookback,
        hidden_size=cfg.hidden_size,
        patience=cfg.patience,
    )
    trained = lstm_train(Dataset(X=design, y=y), tc)
    # attribute in the network's standardized input space so every column's
    # scatter spans a comparable abscissa range; otherwise wide random-walk
    # columns and unit-variance noise columns get incomparable slopes
    design_std = (design - trained.x_mean) / trained.x_std
    windows = build_windows(design_std, cfg.lookback)

    def model(batch):
        return trained.predict_standardized(batch)

    return model, windows, design_std[cfg.lookback - 1 :, :]


def _background(samples: np.ndarray, cfg: PipelineConfig, key: tuple) -> Background:
    bg = Background.subsample(samples, cfg.shap_background, child_seed(cfg.seed, "bg", *key))
    if cfg.backend == "linear":
        # a linear value function only sees the background mean; collapsing
        # the rows keeps the attribution identical at a fraction of the cost
        return Background(rows=bg.rows.mean(axis=0, keepdims=True))
    return bg


def _mirror_scale(Xw: np.ndarray, idx: int, z: np.ndarray, cfg: PipelineConfig) -> float:
    if cfg.backend == "linear":
        return analytic_cj(Xw, idx, z)
    return solve_cj(Xw[:, idx], z, cfg.measure(), cfg.dependence_grid)


def _pair_columns(phi_values, sample_rows, col_plus, col_minus, feature, cfg):
    lp = importance_vector(sample_rows[:, col_plus], phi_values[col_plus],
                           cfg.lowess_frac, cfg.lowess_iters,
                           feature_id=feature, sign="plus")
    lm = importance_vector(sample_rows[:, col_minus], phi_values[col_minus],
                           cfg.lowess_frac, cfg.lowess_iters,
                           feature_id=feature, sign="minus")
    return lp, lm


def _finish(stats: MirrorStatistics, data: Dataset, cfg: PipelineConfig,
            warnings: int) -> SelectionResult:
    sel = select_features(stats, cfg.q)
    sel.warnings = warnings
    if data.truth is not None:
        sel.metrics = evaluate(sel, data.truth)
    return sel


def _empty_stats(p: int) -> MirrorStatistics:
    return MirrorStatistics(m=np.zeros(p), l1_plus=np.zeros(p),
                            l1_minus=np.zeros(p), cosine=np.zeros(p))


def run_catnet(data: Dataset, cfg: PipelineConfig) -> SelectionResult:
    """Per-feature mirror pipeline: refit the backend for every feature.

    A numerical failure on one feature leaves its statistic at 0 and bumps
    the warning count instead of aborting the run.
    """
    work = _screen(data, cfg)
    stats = _empty_stats(data.p)
    warnings = 0
    if len(work) == 0:
        return _finish(stats, data, cfg, warnings)
    Xw = data.X[:, work]
    if cfg.backend == "linear":
        _check_linear_width(data.n, len(work) + 1)

    for idx, j in enumerate(work):
        j = int(j)
        try:
            z = substream(cfg.seed, "mirror", j).standard_normal(data.n)
            c = _mirror_scale(Xw, idx, z, cfg)
            pair = make_mirror(Xw[:, idx], z, c, feature=j)
            design = np.column_stack([pair.x_plus, pair.x_minus, np.delete(Xw, idx, axis=1)])
            model, samples, rows = _fit_backend(design, data.y, cfg, key=("catnet", j))
            bg = _background(samples, cfg, key=(j,))
            phi = shap_matrix(model, samples, bg, cfg.permutations,
                              child_seed(cfg.seed, "shap", j), cfg.rows_per_perm)
            lp, lm = _pair_columns(phi.values, rows, 0, 1, j, cfg)
            stats.m[j] = mirror_statistic(lp, lm)
            stats.l1_plus[j] = np.abs(lp.values).sum()
            stats.l1_minus[j] = np.abs(lm.values).sum()
            na = np.linalg.norm(lp.values) * np.linalg.norm(lm.values)
            stats.cosine[j] = (lp.values @ lm.values) / na if na > 0 else 0.0
        except (CatnetError, np.linalg.LinAlgError):
            warnings += 1
    return _finish(stats, data, cfg, warnings)


def run_scatnet(data: Dataset, cfg: PipelineConfig) -> SelectionResult:
    """Simultaneous mirror pipeline: one backend fit on the doubled design.

    All mirror pairs are built first; the backend trains once on the
    2p-column design and attribution covers every mirror column.  A
    training failure aborts the run.
    """
    work = _screen(data, cfg)
    stats = _empty_stats(data.p)
    if len(work) == 0:
        return _finish(stats, data, cfg, 0)
    Xw = data.X[:, work]
    if cfg.backend == "linear":
        _check_linear_width(data.n, 2 * len(work))

    columns = []
    for idx, j in enumerate(work):
        j = int(j)
        z = substream(cfg.seed, "mirror", j).standard_normal(data.n)
        c = _mirror_scale(Xw, idx, z, cfg)
        pair = make_mirror(Xw[:, idx], z, c, feature=j)
        columns += [pair.x_plus, pair.x_minus]
    design = np.column_stack(columns)

    model, samples, rows = _fit_backend(design, data.y, cfg, key=("scatnet",))
    bg = _background(samples, cfg, key=("scatnet",))
    phi = shap_matrix(model, samples, bg, cfg.permutations,
                      child_seed(cfg.seed, "shap", "scatnet"), cfg.rows_per_perm)

    for idx, j in enumerate(work):
        j = int(j)
        lp, lm = _pair_columns(phi.values, rows, 2 * idx, 2 * idx + 1, j, cfg)
        stats.m[j] = mirror_statistic(lp, lm)
        stats.l1_plus[j] = np.abs(lp.values).sum()
        stats.l1_minus[j] = np.abs(lm.values).sum()
        na = np.linalg.norm(lp.values) * np.linalg.norm(lm.values)
        stats.cosine[j] = (lp.values @ lm.values) / na if na > 0 else 0.0
    return _finish(stats, data, cfg, 0)


def run_gm_linear(data: Dataset, cfg: PipelineConfig) -> SelectionResult:
    """Scalar signed-max baseline from least-squares mirror coefficients.

    Shares the per-feature noise substreams with ``run_catnet`` so paired
    comparisons see identical mirror pairs.
    """
    if cfg.backend != "linear":
        raise ConfigError("the scalar mirror baseline requires the linear backend")
    work = _screen(data, cfg)
    stats = _empty_stats(data.p)
    if len(work) == 0:
        return _finish(stats, data, cfg, 0)
    Xw = data.X[:, work]
    _check_linear_width(data.n, len(work) + 1)

    for idx, j in enumerate(work):
        j = int(j)
        z = substream(cfg.seed, "mirror", j).standard_normal(data.n)
        c = analytic_cj(Xw, idx, z)
        pair = make_mirror(Xw[:, idx], z, c, feature=j)
        design = np.column_stack([pair.x_plus, pair.x_minus, np.delete(Xw, idx, axis=1)])
        fit = ols_fit(design, data.y)
        bp, bm = float(fit.coef[0]), float(fit.coef[1])
        stats.m[j] = np.sign(bp * bm) * max(abs(bp), abs(bm))
    return _finish(stats, data, cfg, 0)

"""FDR-controlled feature selection with Gaussian mirrors and SHAP derivatives."""

from .datagen import (
    Dataset,
    GroundTruth,
    LinkKind,
    apply_link,
    gen_brownian_design,
    gen_linear_design,
)
from .dependence import (
    DependenceMeasure,
    KernelKind,
    hsic_lagged,
    lag_weights,
    mirror_dependence,
    solve_cj,
)
from .importance import ImportanceVector, importance_vector, lowess_smooth
from .linear import LinearFit, analytic_cj, lasso_fit, lasso_preselect, ols_fit
from .lstm import LstmParams, TrainConfig, TrainedLstm, lstm_forward, lstm_gradcheck, lstm_train
from .mirror import (
    MirrorPair,
    MirrorStatistics,
    SelectionResult,
    evaluate,
    fdp_hat,
    make_mirror,
    mirror_statistic,
    select_features,
)
from .pipelines import PipelineConfig, run_catnet, run_gm_linear, run_scatnet
from .shapley import Background, ShapMatrix, exact_shap, mc_shap, shap_matrix

__version__ = "0.1.0"

__all__ = [
    "Background",
    "Dataset",
    "DependenceMeasure",
    "GroundTruth",
    "ImportanceVector",
    "KernelKind",
    "LinearFit",
    "LinkKind",
    "LstmParams",
    "MirrorPair",
    "MirrorStatistics",
    "PipelineConfig",
    "SelectionResult",
    "ShapMatrix",
    "TrainConfig",
    "TrainedLstm",
    "analytic_cj",
    "apply_link",
    "evaluate",
    "exact_shap",
    "fdp_hat",
    "gen_brownian_design",
    "gen_linear_design",
    "hsic_lagged",
    "importance_vector",
    "lag_weights",
    "lasso_fit",
    "lasso_preselect",
    "lowess_smooth",
    "lstm_forward",
    "lstm_gradcheck",
    "lstm_train",
    "make_mirror",
    "mc_shap",
    "mirror_dependence",
    "mirror_statistic",
    "ols_fit",
    "run_catnet",
    "run_gm_linear",
    "run_scatnet",
    "select_features",
    "shap_matrix",
    "solve_cj",
]

"""Interpreted numpy backend: the kernel implementations, unjitted."""
from ._impl import (  # noqa: F401
    lasso_cd,
    lowess_fit,
    lstm_backward,
    lstm_forward,
    lstm_predict,
)

"""Numba backend: the same kernels, compiled with ``@njit``."""
from numba import njit

from . import _impl

_jit = njit(cache=True)

lowess_fit = _jit(_impl.lowess_fit)
lasso_cd = _jit(_impl.lasso_cd)
lstm_forward = _jit(_impl.lstm_forward)
lstm_predict = _jit(_impl.lstm_predict)
lstm_backward = _jit(_impl.lstm_backward)

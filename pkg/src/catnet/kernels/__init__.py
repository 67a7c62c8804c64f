"""Kernel backend selection.

``CATNET_BACKEND=numpy`` forces the interpreted numpy implementations and
``CATNET_BACKEND=numba`` forces the compiled ones.  The default (``auto``)
mixes per kernel according to measurement: the pointwise loop kernels
(lowess, coordinate descent) are far faster compiled, while the batched
recurrent-network kernels are matmul-bound and run faster on numpy's
threaded BLAS (see benchmarks/bench_kernels.py).  ``BACKEND`` records the
active choice: "numpy", "numba" or "mixed".
"""
import os

_choice = os.environ.get("CATNET_BACKEND", "auto").lower()
if _choice not in ("auto", "numba", "numpy"):
    raise ImportError(f"CATNET_BACKEND must be auto, numba or numpy, got {_choice!r}")

from . import numpy_backend as _np_backend

_nb_backend = None
if _choice != "numpy":
    try:
        from . import numba_backend as _nb_backend
    except ImportError:
        if _choice == "numba":
            raise

if _nb_backend is None:
    BACKEND = "numpy"
    _loop_backend = _np_backend
    _blas_backend = _np_backend
elif _choice == "numba":
    BACKEND = "numba"
    _loop_backend = _nb_backend
    _blas_backend = _nb_backend
else:
    BACKEND = "mixed"
    _loop_backend = _nb_backend
    _blas_backend = _np_backend

lowess_fit = _loop_backend.lowess_fit
lasso_cd = _loop_backend.lasso_cd
lstm_forward = _blas_backend.lstm_forward
lstm_predict = _blas_backend.lstm_predict
lstm_backward = _blas_backend.lstm_backward

"""Benchmark the jitted kernels against the interpreted numpy fallback.

Run:  python benchmarks/bench_kernels.py [--repeats N]

Each kernel is timed on a representative workload after a warmup call, so
numba compilation does not pollute the numbers.
"""
import argparse
import time

import numpy as np

from catnet.kernels import numba_backend, numpy_backend
from catnet.lstm import _kernel_args, _time_major, init_params


def timeit(fn, repeats):
    best = float("inf")
    for _ in range(repeats):
        t0 = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - t0)
    return best


def bench_lowess(backend):
    rng = np.random.default_rng(0)
    x = np.sort(rng.normal(size=2000))
    y = np.sin(x) + 0.2 * rng.normal(size=2000)
    return lambda: backend.lowess_fit(x, y, 400, 2)


def bench_lasso(backend):
    rng = np.random.default_rng(1)
    n, p = 250, 400
    X = rng.normal(size=(n, p))
    Xs = (X - X.mean(axis=0)) / X.std(axis=0)
    beta_true = np.zeros(p)
    beta_true[:8] = rng.normal(size=8) * 3
    y = Xs @ beta_true + rng.normal(size=n)
    yc = np.ascontiguousarray(y - y.mean())
    XT = np.ascontiguousarray(Xs.T)

    def run():
        beta = np.zeros(p)
        backend.lasso_cd(XT, yc, 0.05, beta, 1e-7, 500)

    return run


def _lstm_setup(batch):
    rng = np.random.default_rng(2)
    params = init_params(40, 32, 5, seed=0)
    W = _time_major(rng.normal(size=(batch, 5, 40)))
    return params, W, rng.normal(size=batch)


def bench_lstm_train_step(backend):
    params, W, targets = _lstm_setup(batch=32)
    args = _kernel_args(params)
    l0, l1 = params.layers

    def run():
        out = backend.lstm_forward(W, *args)
        dpred = 2.0 * (out[0] - targets) / len(targets)
        backend.lstm_backward(W, dpred, *out[1:], l0.w_x, l0.w_h, l1.w_x, l1.w_h, params.w_fc)

    return run


def bench_lstm_predict(backend):
    params, W, _ = _lstm_setup(batch=4096)
    args = _kernel_args(params)
    return lambda: backend.lstm_predict(W, *args)


BENCHES = [
    ("lowess n=2000 r=400 iters=2", bench_lowess),
    ("lasso_cd n=250 p=400", bench_lasso),
    ("lstm train step B=32 k=5 d=40 h=32", bench_lstm_train_step),
    ("lstm predict B=4096 k=5 d=40 h=32", bench_lstm_predict),
]


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--repeats", type=int, default=5)
    args = parser.parse_args()

    print(f"{'kernel':38s} {'numpy':>10s} {'numba':>10s} {'speedup':>8s}")
    for name, make in BENCHES:
        run_np = make(numpy_backend)
        run_nb = make(numba_backend)
        run_nb()  # trigger compilation outside the timing loop
        t_np = timeit(run_np, args.repeats)
        t_nb = timeit(run_nb, args.repeats)
        print(f"{name:38s} {t_np * 1e3:9.2f}ms {t_nb * 1e3:9.2f}ms {t_np / t_nb:7.1f}x")


if __name__ == "__main__":
    main()

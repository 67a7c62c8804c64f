"""Two-layer LSTM regressor trained from scratch with BPTT.

Gate blocks are stacked [input, forget, cell, output] along the leading
axis of each weight matrix; each gate keeps separate input-side and
hidden-side biases that enter the pre-activation as a sum.  The readout
is linear: prediction = w_fc . h_T + b_fc on the final top-layer hidden
state of a lookback window.
"""
from __future__ import annotations

import csv
import json
import math
import os
from dataclasses import dataclass, field, replace

import numpy as np

from . import kernels
from .datagen import Dataset
from .errors import DivergenceError
from .rng import substream

CHECKPOINT_FORMAT = 1


@dataclass
class LayerParams:
    w_x: np.ndarray  # (4H, in_dim)
    w_h: np.ndarray  # (4H, H)
    b_x: np.ndarray  # (4H,)
    b_h: np.ndarray  # (4H,)


@dataclass
class LstmParams:
    layers: tuple[LayerParams, LayerParams]
    w_fc: np.ndarray  # (H,)
    b_fc: np.ndarray  # (1,)
    input_size: int
    hidden_size: int
    lookback: int

    def arrays(self) -> list[np.ndarray]:
        out = []
        for layer in self.layers:
            out += [layer.w_x, layer.w_h, layer.b_x, layer.b_h]
        out += [self.w_fc, self.b_fc]
        return out

    def copy(self) -> "LstmParams":
        l0, l1 = self.layers
        return LstmParams(
            layers=(
                LayerParams(l0.w_x.copy(), l0.w_h.copy(), l0.b_x.copy(), l0.b_h.copy()),
                LayerParams(l1.w_x.copy(), l1.w_h.copy(), l1.b_x.copy(), l1.b_h.copy()),
            ),
            w_fc=self.w_fc.copy(),
            b_fc=self.b_fc.copy(),
            input_size=self.input_size,
            hidden_size=self.hidden_size,
            lookback=self.lookback,
        )


@dataclass
class TrainConfig:
    seed: int
    epochs: int = 200
    learning_rate: float = 1e-3
    batch_size: int = 32
    lookback: int = 5
    hidden_size: int | None = None  # None -> default_hidden(input width)
    patience: int = 10

    def __post_init__(self):
        if self.epochs < 0:
            raise ValueError("epochs must be >= 0")
        for name in ("learning_rate", "batch_size", "lookback", "patience"):
            if getattr(self, name) <= 0:
                raise ValueError(f"{name} must be positive")
        if self.hidden_size is not None and self.hidden_size <= 0:
            raise ValueError("hidden_size must be positive")


def default_hidden(input_size: int) -> int:
    """Width rule: 20*log10(input size), floored at 8."""
    return max(8, round(20.0 * math.log10(max(input_size, 2))))


def init_params(input_size: int, hidden_size: int, lookback: int, seed: int) -> LstmParams:
    bound = 1.0 / math.sqrt(hidden_size)
    shapes = [
        (4 * hidden_size, input_size), (4 * hidden_size, hidden_size),
        (4 * hidden_size,), (4 * hidden_size,),
        (4 * hidden_size, hidden_size), (4 * hidden_size, hidden_size),
        (4 * hidden_size,), (4 * hidden_size,),
        (hidden_size,), (1,),
    ]
    arrs = [substream(seed, "init", i).uniform(-bound, bound, size=s) for i, s in enumerate(shapes)]
    return LstmParams(
        layers=(LayerParams(*arrs[0:4]), LayerParams(*arrs[4:8])),
        w_fc=arrs[8],
        b_fc=arrs[9],
        input_size=input_size,
        hidden_size=hidden_size,
        lookback=lookback,
    )


def _kernel_args(params: LstmParams):
    l0, l1 = params.layers
    return (
        np.ascontiguousarray(l0.w_x.T), np.ascontiguousarray(l0.w_h.T), l0.b_x + l0.b_h,
        np.ascontiguousarray(l1.w_x.T), np.ascontiguousarray(l1.w_h.T), l1.b_x + l1.b_h,
        params.w_fc, float(params.b_fc[0]),
    )


def _time_major(windows: np.ndarray) -> np.ndarray:
    return np.ascontiguousarray(np.swapaxes(windows, 0, 1))


def forward_batch(params: LstmParams, windows: np.ndarray):
    """Predictions plus activation caches for a (B, k, d) window batch."""
    return kernels.lstm_forward(_time_major(windows), *_kernel_args(params))


def predict_batch(params: LstmParams, windows: np.ndarray) -> np.ndarray:
    return kernels.lstm_predict(_time_major(windows), *_kernel_args(params))


@dataclass
class LstmStates:
    h: np.ndarray  # (layers, k, H)
    c: np.ndarray
    i: np.ndarray
    f: np.ndarray
    g: np.ndarray
    o: np.ndarray


def lstm_forward(params: LstmParams, window: np.ndarray) -> tuple[float, LstmStates]:
    """Single-window forward pass exposing all gate and state trajectories."""
    window = np.asarray(window, dtype=np.float64)
    if window.shape != (params.lookback, params.input_size):
        raise ValueError(
            f"window shape {window.shape} != ({params.lookback}, {params.input_size})"
        )
    out = forward_batch(params, window[None, :, :])
    pred = float(out[0][0])
    (I0, F0, G0, O0, C0, H0, I1, F1, G1, O1, C1, H1) = out[1:]

    def stack(a, b):
        return np.stack([a[:, 0, :], b[:, 0, :]])

    states = LstmStates(
        h=stack(H0, H1), c=stack(C0, C1), i=stack(I0, I1),
        f=stack(F0, F1), g=stack(G0, G1), o=stack(O0, O1),
    )
    return pred, states


def _grads(params: LstmParams, windows: np.ndarray, dpred: np.ndarray, caches):
    l0, l1 = params.layers
    dWx0, dWh0, db0, dWx1, dWh1, db1, dwfc, dbfc = kernels.lstm_backward(
        _time_major(windows), dpred, *caches, l0.w_x, l0.w_h, l1.w_x, l1.w_h, params.w_fc
    )
    # the combined gate bias gradient applies to both bias vectors
    return [dWx0, dWh0, db0, db0, dWx1, dWh1, db1, db1, dwfc, np.array([dbfc])]


def loss_and_grads(params: LstmParams, windows: np.ndarray, targets: np.ndarray):
    """Mean squared error over the batch and its parameter gradients."""
    out = forward_batch(params, windows)
    pred = out[0]
    err = pred - targets
    loss = float(np.mean(err**2))
    dpred = 2.0 * err / len(err)
    return loss, _grads(params, windows, dpred, out[1:])


def build_windows(X: np.ndarray, lookback: int) -> np.ndarray:
    """Sliding (n-k+1, k, d) windows over time-ordered rows."""
    n = X.shape[0]
    if n < lookback:
        raise ValueError(f"need at least {lookback} rows, got {n}")
    view = np.lib.stride_tricks.sliding_window_view(X, lookback, axis=0)
    return np.ascontiguousarray(np.swapaxes(view, 1, 2))


class _Adam:
    def __init__(self, arrays, lr, b1=0.9, b2=0.999, eps=1e-8):
        self.lr, self.b1, self.b2, self.eps = lr, b1, b2, eps
        self.m = [np.zeros_like(a) for a in arrays]
        self.v = [np.zeros_like(a) for a in arrays]
        self.t = 0

    def step(self, arrays, grads):
        self.t += 1
        bc1 = 1.0 - self.b1**self.t
        bc2 = 1.0 - self.b2**self.t
        for a, g, m, v in zip(arrays, grads, self.m, self.v):
            m *= self.b1
            m += (1.0 - self.b1) * g
            v *= self.b2
            v += (1.0 - self.b2) * g * g
            a -= self.lr * (m / bc1) / (np.sqrt(v / bc2) + self.eps)


@dataclass
class TrainedLstm:
    params: LstmParams
    x_mean: np.ndarray
    x_std: np.ndarray
    y_mean: float
    y_std: float
    config: TrainConfig
    loss_trace: list = field(default_factory=list)  # (epoch, train_mse, val_mse)

    def predict(self, windows: np.ndarray) -> np.ndarray:
        """Score (m, k, d) windows given in original (unstandardized) units."""
        w = (np.asarray(windows, dtype=np.float64) - self.x_mean) / self.x_std
        return self.predict_standardized(w)

    def predict_standardized(self, windows: np.ndarray) -> np.ndarray:
        """Score windows already in the network's standardized input space."""
        w = np.asarray(windows, dtype=np.float64)
        return predict_batch(self.params, w) * self.y_std + self.y_mean


def lstm_train(data: Dataset, cfg: TrainConfig) -> TrainedLstm:
    """Fit the regressor on sliding windows (t-k+1..t) -> y_t.

    Inputs are standardized per column; the target is standardized
    internally and predictions are returned in original units.  Adam with
    early stopping on a 10% tail validation split; the best-validation
    parameters are kept.  The loss trace records original-unit MSE.
    """
    X, y = data.X, data.y
    k = cfg.lookback
    if data.n <= k:
        raise ValueError(f"need more than lookback={k} rows, got {data.n}")
    hidden = cfg.hidden_size if cfg.hidden_size is not None else default_hidden(data.p)

    x_mean = X.mean(axis=0)
    x_std = np.where(X.std(axis=0) > 0.0, X.std(axis=0), 1.0)
    y_mean = float(y.mean())
    y_std = float(y.std()) or 1.0

    windows = build_windows((X - x_mean) / x_std, k)
    targets = (y[k - 1 :] - y_mean) / y_std
    n_w = len(targets)

    params = init_params(data.p, hidden, k, cfg.seed)
    model = TrainedLstm(params, x_mean, x_std, y_mean, y_std, cfg)
    if cfg.epochs == 0:
        return model

    n_val = max(int(math.ceil(0.1 * n_w)), 1) if n_w >= 2 else 0
    n_train = n_w - n_val
    Wtr, ytr = windows[:n_train], targets[:n_train]
    Wva, yva = windows[n_train:], targets[n_train:]

    rng = substream(cfg.seed, "shuffle")
    adam = _Adam(params.arrays(), cfg.learning_rate)
    best_val = math.inf
    best_params = params.copy()
    bad = 0
    scale = y_std**2

    for epoch in range(cfg.epochs):
        order = rng.permutation(n_train)
        for lo in range(0, n_train, cfg.batch_size):
            idx = order[lo : lo + cfg.batch_size]
            _, grads = loss_and_grads(params, Wtr[idx], ytr[idx])
            adam.step(params.arrays(), grads)
        # overflow here is legitimate divergence, reported just below
        with np.errstate(over="ignore"):
            train_mse = float(np.mean((predict_batch(params, Wtr) - ytr) ** 2)) * scale
            if n_val:
                val_mse = float(np.mean((predict_batch(params, Wva) - yva) ** 2)) * scale
            else:
                val_mse = train_mse
        if not (math.isfinite(train_mse) and math.isfinite(val_mse)):
            raise DivergenceError(epoch)
        model.loss_trace.append((epoch, train_mse, val_mse))
        if val_mse < best_val - 1e-12:
            best_val = val_mse
            best_params = params.copy()
            bad = 0
        else:
            bad += 1
            if bad >= cfg.patience:
                break

    model.params = best_params
    return model


def lstm_gradcheck(params: LstmParams, window: np.ndarray, target: float,
                   step: float = 1e-5) -> float:
    """Max relative disagreement between BPTT and central differences.

    The loss is the squared error (pred - target)^2 of a single window.
    Relative error uses a 1e-6 floor in the denominator so zero-gradient
    components compare on the finite-difference noise scale.
    """
    window = np.asarray(window, dtype=np.float64)
    batch = window[None, :, :]
    tvec = np.array([float(target)])

    _, grads = loss_and_grads(params, batch, tvec)

    def loss() -> float:
        pred = float(predict_batch(params, batch)[0])
        return (pred - float(target)) ** 2

    worst = 0.0
    for arr, g in zip(params.arrays(), grads):
        flat = arr.reshape(-1)
        gflat = np.asarray(g).reshape(-1)
        for i in range(flat.size):
            keep = flat[i]
            flat[i] = keep + step
            up = loss()
            flat[i] = keep - step
            down = loss()
            flat[i] = keep
            fd = (up - down) / (2.0 * step)
            rel = abs(gflat[i] - fd) / max(abs(gflat[i]), abs(fd), 1e-6)
            worst = max(worst, rel)
    return worst


# ---------------------------------------------------------------------------
# checkpoint and loss-trace files


def save_checkpoint(model: TrainedLstm, path: str | os.PathLike) -> None:
    p = model.params
    payload = {
        "format": CHECKPOINT_FORMAT,
        "input_size": p.input_size,
        "hidden_size": p.hidden_size,
        "lookback": p.lookback,
        "x_mean": model.x_mean.tolist(),
        "x_std": model.x_std.tolist(),
        "y_mean": model.y_mean,
        "y_std": model.y_std,
        "arrays": [a.tolist() for a in p.arrays()],
    }
    with open(path, "w") as fh:
        json.dump(payload, fh, sort_keys=True)


def load_checkpoint(path: str | os.PathLike, cfg: TrainConfig | None = None) -> TrainedLstm:
    with open(path) as fh:
        payload = json.load(fh)
    if payload.get("format") != CHECKPOINT_FORMAT:
        raise ValueError(f"unsupported checkpoint format {payload.get('format')!r}")
    d, h, k = payload["input_size"], payload["hidden_size"], payload["lookback"]
    params = init_params(d, h, k, seed=0)
    for a, data in zip(params.arrays(), payload["arrays"]):
        a[...] = np.asarray(data, dtype=np.float64).reshape(a.shape)
    if cfg is None:
        cfg = TrainConfig(seed=0, lookback=k, hidden_size=h)
    else:
        cfg = replace(cfg, lookback=k, hidden_size=h)
    return TrainedLstm(
        params=params,
        x_mean=np.asarray(payload["x_mean"], dtype=np.float64),
        x_std=np.asarray(payload["x_std"], dtype=np.float64),
        y_mean=float(payload["y_mean"]),
        y_std=float(payload["y_std"]),
        config=cfg,
    )


def save_loss_trace(model: TrainedLstm, path: str | os.PathLike) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["epoch", "train_mse", "val_mse"])
        for epoch, train_mse, val_mse in model.loss_trace:
            writer.writerow([epoch, repr(float(train_mse)), repr(float(val_mse))])

"""Hot numeric kernels, written in the numba-compatible numpy subset.

These functions are exported twice: as-is (interpreted numpy fallback) and
wrapped with ``numba.njit`` (default).  Keep them self-contained: no calls
into other package modules, no Python objects, contiguous-array matmuls
only.
"""
import numpy as np


def lowess_fit(x, y, r, iters):
    """Tricube-weighted local linear fit at each x[i] over its r nearest
    neighbours, with `iters` bisquare reweighting passes.

    x must be sorted ascending.  Returns fitted values aligned with x.
    """
    n = x.shape[0]
    fitted = np.empty(n)
    delta = np.ones(n)
    for sweep in range(iters + 1):
        for i in range(n):
            # grow the window one point at a time toward the nearer side
            lo = i
            hi = i + 1
            while hi - lo < r:
                if lo > 0 and (hi >= n or x[i] - x[lo - 1] <= x[hi] - x[i]):
                    lo -= 1
                elif hi < n:
                    hi += 1
                else:
                    break
            dmax = max(x[i] - x[lo], x[hi - 1] - x[i])
            sw = 0.0
            swx = 0.0
            swy = 0.0
            swxx = 0.0
            swxy = 0.0
            cnt = 0
            for m in range(lo, hi):
                if dmax > 0.0:
                    t = abs(x[m] - x[i]) / dmax
                    w = (1.0 - t * t * t) ** 3 if t < 1.0 else 0.0
                else:
                    w = 1.0
                w *= delta[m]
                if w <= 0.0:
                    continue
                cnt += 1
                dx = x[m] - x[i]
                sw += w
                swx += w * dx
                swy += w * y[m]
                swxx += w * dx * dx
                swxy += w * dx * y[m]
            if sw <= 0.0:
                # all neighbours downweighted to zero; plain mean rescue
                acc = 0.0
                for m in range(lo, hi):
                    acc += y[m]
                fitted[i] = acc / (hi - lo)
                continue
            xb = swx / sw
            yb = swy / sw
            vx = swxx / sw - xb * xb
            cxy = swxy / sw - xb * yb
            if cnt >= 2 and vx > 1e-300:
                fitted[i] = yb - (cxy / vx) * xb
            else:
                fitted[i] = yb
        if sweep == iters:
            break
        res = y - fitted
        s = np.median(np.abs(res))
        if s <= 0.0:
            break
        for i in range(n):
            u = res[i] / (6.0 * s)
            delta[i] = (1.0 - u * u) ** 2 if abs(u) < 1.0 else 0.0
    return fitted


def lasso_cd(XT, yc, lam, beta, tol, max_sweeps):
    """Cyclic coordinate descent for (1/2n)||y - X b||^2 + lam * ||b||_1.

    XT is the transposed design (p, n) with centered columns of unit
    mean-square; yc is the centered response.  beta is updated in place
    (warm start).  Returns (n_sweeps, converged, obj) where obj[s] is the
    objective after sweep s (valid for s < n_sweeps).
    """
    p, n = XT.shape
    r = yc.copy()
    for j in range(p):
        if beta[j] != 0.0:
            r -= XT[j] * beta[j]
    obj = np.zeros(max_sweeps)
    for s in range(max_sweeps):
        maxd = 0.0
        for j in range(p):
            xj = XT[j]
            bj = beta[j]
            g = bj + np.dot(xj, r) / n
            if g > lam:
                nb = g - lam
            elif g < -lam:
                nb = g + lam
            else:
                nb = 0.0
            d = nb - bj
            if d != 0.0:
                r -= xj * d
                beta[j] = nb
                if abs(d) > maxd:
                    maxd = abs(d)
        l1 = 0.0
        for j in range(p):
            l1 += abs(beta[j])
        obj[s] = 0.5 * np.dot(r, r) / n + lam * l1
        if maxd < tol:
            return s + 1, True, obj
    return max_sweeps, False, obj


def lstm_forward(X, WxT0, WhT0, b0, WxT1, WhT1, b1, wfc, bfc):
    """Two stacked recurrent cells with input/forget/cell/output gating and
    a linear readout of the final top hidden state.

    X is time-major (T, B, D); gate blocks are ordered [input, forget,
    cell, output] along the 4H axis; weight matrices arrive transposed
    (in_dim, 4H) so every matmul runs on contiguous operands.  Returns the
    prediction vector plus the per-step activations the backward pass needs.
    """
    T, B, _ = X.shape
    H = wfc.shape[0]
    I0 = np.empty((T, B, H)); F0 = np.empty((T, B, H)); G0 = np.empty((T, B, H))
    O0 = np.empty((T, B, H)); C0 = np.empty((T, B, H)); Hs0 = np.empty((T, B, H))
    I1 = np.empty((T, B, H)); F1 = np.empty((T, B, H)); G1 = np.empty((T, B, H))
    O1 = np.empty((T, B, H)); C1 = np.empty((T, B, H)); Hs1 = np.empty((T, B, H))
    h0 = np.zeros((B, H)); c0 = np.zeros((B, H))
    h1 = np.zeros((B, H)); c1 = np.zeros((B, H))
    for t in range(T):
        z = np.dot(X[t], WxT0) + np.dot(h0, WhT0) + b0
        i = 1.0 / (1.0 + np.exp(-z[:, 0:H]))
        f = 1.0 / (1.0 + np.exp(-z[:, H:2 * H]))
        g = np.tanh(z[:, 2 * H:3 * H])
        o = 1.0 / (1.0 + np.exp(-z[:, 3 * H:4 * H]))
        c0 = f * c0 + i * g
        h0 = o * np.tanh(c0)
        I0[t] = i; F0[t] = f; G0[t] = g; O0[t] = o; C0[t] = c0; Hs0[t] = h0

        z = np.dot(h0, WxT1) + np.dot(h1, WhT1) + b1
        i = 1.0 / (1.0 + np.exp(-z[:, 0:H]))
        f = 1.0 / (1.0 + np.exp(-z[:, H:2 * H]))
        g = np.tanh(z[:, 2 * H:3 * H])
        o = 1.0 / (1.0 + np.exp(-z[:, 3 * H:4 * H]))
        c1 = f * c1 + i * g
        h1 = o * np.tanh(c1)
        I1[t] = i; F1[t] = f; G1[t] = g; O1[t] = o; C1[t] = c1; Hs1[t] = h1
    pred = np.dot(h1, wfc) + bfc
    return pred, I0, F0, G0, O0, C0, Hs0, I1, F1, G1, O1, C1, Hs1


def lstm_predict(X, WxT0, WhT0, b0, WxT1, WhT1, b1, wfc, bfc):
    """Forward pass without activation caches (memory-light batch scoring)."""
    T, B, _ = X.shape
    H = wfc.shape[0]
    h0 = np.zeros((B, H)); c0 = np.zeros((B, H))
    h1 = np.zeros((B, H)); c1 = np.zeros((B, H))
    for t in range(T):
        z = np.dot(X[t], WxT0) + np.dot(h0, WhT0) + b0
        i = 1.0 / (1.0 + np.exp(-z[:, 0:H]))
        f = 1.0 / (1.0 + np.exp(-z[:, H:2 * H]))
        g = np.tanh(z[:, 2 * H:3 * H])
        o = 1.0 / (1.0 + np.exp(-z[:, 3 * H:4 * H]))
        c0 = f * c0 + i * g
        h0 = o * np.tanh(c0)
        z = np.dot(h0, WxT1) + np.dot(h1, WhT1) + b1
        i = 1.0 / (1.0 + np.exp(-z[:, 0:H]))
        f = 1.0 / (1.0 + np.exp(-z[:, H:2 * H]))
        g = np.tanh(z[:, 2 * H:3 * H])
        o = 1.0 / (1.0 + np.exp(-z[:, 3 * H:4 * H]))
        c1 = f * c1 + i * g
        h1 = o * np.tanh(c1)
    return np.dot(h1, wfc) + bfc


def lstm_backward(X, dpred,
                  I0, F0, G0, O0, C0, Hs0,
                  I1, F1, G1, O1, C1, Hs1,
                  Wx0, Wh0, Wx1, Wh1, wfc):
    """Backpropagation through time for `lstm_forward`.

    dpred is the gradient of the loss w.r.t. the prediction vector.
    Weight matrices arrive in math orientation (4H, in_dim).  Returns
    gradients for both layers' weights and (combined) gate biases, the
    readout weights, and the readout bias.
    """
    T, B, D = X.shape
    H = wfc.shape[0]
    dWx0 = np.zeros((4 * H, D)); dWh0 = np.zeros((4 * H, H)); db0 = np.zeros(4 * H)
    dWx1 = np.zeros((4 * H, H)); dWh1 = np.zeros((4 * H, H)); db1 = np.zeros(4 * H)
    dwfc = np.dot(dpred, Hs1[T - 1])
    dbfc = np.sum(dpred)

    zeros = np.zeros((B, H))
    dz = np.empty((B, 4 * H))

    # top layer: head gradient enters only at the final step
    dh_rec = dpred.reshape(B, 1) * wfc.reshape(1, H)
    dc_rec = np.zeros((B, H))
    dX1 = np.empty((T, B, H))
    for t in range(T - 1, -1, -1):
        dh = dh_rec
        tc = np.tanh(C1[t])
        do = dh * tc
        dc = dc_rec + dh * O1[t] * (1.0 - tc * tc)
        c_prev = C1[t - 1] if t > 0 else zeros
        h_prev = Hs1[t - 1] if t > 0 else zeros
        dz[:, 0:H] = dc * G1[t] * I1[t] * (1.0 - I1[t])
        dz[:, H:2 * H] = dc * c_prev * F1[t] * (1.0 - F1[t])
        dz[:, 2 * H:3 * H] = dc * I1[t] * (1.0 - G1[t] * G1[t])
        dz[:, 3 * H:4 * H] = do * O1[t] * (1.0 - O1[t])
        dzT = np.ascontiguousarray(dz.T)
        dWx1 += np.dot(dzT, Hs0[t])
        dWh1 += np.dot(dzT, h_prev)
        db1 += np.sum(dz, 0)
        dh_rec = np.dot(dz, Wh1)
        dc_rec = dc * F1[t]
        dX1[t] = np.dot(dz, Wx1)

    dh_rec = np.zeros((B, H))
    dc_rec = np.zeros((B, H))
    for t in range(T - 1, -1, -1):
        dh = dX1[t] + dh_rec
        tc = np.tanh(C0[t])
        do = dh * tc
        dc = dc_rec + dh * O0[t] * (1.0 - tc * tc)
        c_prev = C0[t - 1] if t > 0 else zeros
        h_prev = Hs0[t - 1] if t > 0 else zeros
        dz[:, 0:H] = dc * G0[t] * I0[t] * (1.0 - I0[t])
        dz[:, H:2 * H] = dc * c_prev * F0[t] * (1.0 - F0[t])
        dz[:, 2 * H:3 * H] = dc * I0[t] * (1.0 - G0[t] * G0[t])
        dz[:, 3 * H:4 * H] = do * O0[t] * (1.0 - O0[t])
        dzT = np.ascontiguousarray(dz.T)
        dWx0 += np.dot(dzT, X[t])
        dWh0 += np.dot(dzT, h_prev)
        db0 += np.sum(dz, 0)
        dh_rec = np.dot(dz, Wh0)
        dc_rec = dc * F0[t]

    return dWx0, dWh0, db0, dWx1, dWh1, db1, dwfc, dbfc

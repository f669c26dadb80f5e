"""Compiled inner loops: perception and population-vector decoding.

``perceive_trace`` mirrors ``Agent.perceive_reference`` step for step; the
pure-numpy methods on ``NeuralMap`` and ``Agent`` remain the reference and the
tests compare the two.
"""

import numpy as np
from numba import njit

PROP_WEIGHTED_SUM = 0
PROP_EXPONENTIAL = 1
GAIN_TUNED = 0
GAIN_PROPAGATED = 1


@njit(cache=True)
def _activate(X, s, sigma, out):
    peak = 1.0 / (np.sqrt(2.0 * np.pi) * sigma)
    inv = 0.5 / (sigma * sigma)
    for i in range(X.shape[0]):
        d2 = 0.0
        for k in range(X.shape[1]):
            t = X[i, k] - s[k]
            d2 += t * t
        out[i] = peak * np.exp(-d2 * inv)


@njit(cache=True)
def _pull(X, target, g, lr):
    for i in range(X.shape[0]):
        a = lr * g[i]
        if a > 1.0:
            a = 1.0
        for k in range(X.shape[1]):
            X[i, k] += a * (target[k] - X[i, k])


# Neurons whose log-weight trails the best one by more than this add less
# than 1e-17 relative weight to a population vector.
DECODE_LOG_CUTOFF = 40.0


@njit(cache=True)
def decode_points(points, X, sigma):
    """Population vector of the Gaussian response to each row of ``points``."""
    n, dim = points.shape
    out = np.empty((n, dim))
    d2 = np.empty(X.shape[0])
    inv = 0.5 / (sigma * sigma)
    for p in range(n):
        best = np.inf
        for i in range(X.shape[0]):
            acc = 0.0
            for k in range(dim):
                t = X[i, k] - points[p, k]
                acc += t * t
            d2[i] = acc
            if acc < best:
                best = acc
        total = 0.0
        for k in range(dim):
            out[p, k] = 0.0
        for i in range(X.shape[0]):
            shifted = (d2[i] - best) * inv
            if shifted < DECODE_LOG_CUTOFF:
                w = np.exp(-shifted)
                total += w
                for k in range(dim):
                    out[p, k] += w * X[i, k]
        for k in range(dim):
            out[p, k] /= total
    return out


@njit(cache=True)
def perceive_trace(P, M, W, mean_p, mean_m, trace, target_of_point, chosen, is_own,
                   sigma_p, lr_p, sigma_m, lr_m, hebb_rate, mean_decay, prop_mode, gain_mode):
    n_p = P.shape[0]
    n_m = M.shape[0]
    g = np.empty(n_p)
    gm = np.empty(n_m)
    raw = np.empty(n_m, dtype=np.float32)
    g32 = np.empty(n_p, dtype=np.float32)
    dp = np.empty(n_p)
    mm32 = np.empty(n_m, dtype=np.float32)
    target = np.empty(M.shape[1])
    negligible = 1e-16 / (np.sqrt(2.0 * np.pi) * sigma_p)
    for t in range(trace.shape[0]):
        s = trace[t]
        _activate(P, s, sigma_p, g)
        _pull(P, s, g, lr_p)
        pos = target_of_point[t]
        if is_own and pos >= 0:
            c = chosen[pos]
            for i in range(n_p):
                dp[i] = hebb_rate * (g[i] - mean_p[i])
            for j in range(n_m):
                mm32[j] = mean_m[j]
            for i in range(n_p):
                di = np.float32(dp[i])
                row = W[i]
                for j in range(n_m):
                    row[j] -= di * mm32[j]
                row[c] += di
            for i in range(n_p):
                mean_p[i] = mean_decay * mean_p[i] + (1.0 - mean_decay) * g[i]
            for j in range(n_m):
                mean_m[j] *= mean_decay
            mean_m[c] += 1.0 - mean_decay
        for j in range(n_m):
            raw[j] = 0.0
        # Rows weighted below 1e-16 of the peak change raw only at rounding level.
        for i in range(n_p):
            g32[i] = g[i]
        for i in range(n_p):
            gi = g32[i]
            if g[i] > negligible:
                row = W[i]
                for j in range(n_m):
                    raw[j] += gi * row[j]
        if prop_mode == PROP_EXPONENTIAL:
            for j in range(n_m):
                raw[j] = np.exp(-raw[j] / np.float32(sigma_p * sigma_p))
        else:
            top = raw.max()
            if top > 0.0:
                for j in range(n_m):
                    raw[j] = raw[j] / top if raw[j] > 0.0 else 0.0
            else:
                raw[:] = 0.0
        if not (raw.max() > 0.0):
            continue
        m = np.argmax(raw)
        for k in range(M.shape[1]):
            target[k] = M[m, k]
        if gain_mode == GAIN_PROPAGATED:
            _pull(M, target, raw, lr_m)
        else:
            _activate(M, target, sigma_m, gm)
            _pull(M, target, gm, lr_m)

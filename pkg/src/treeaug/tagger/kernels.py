"""Masked LSTM forward/backward kernels.

The same source is used twice: once as plain numpy and once compiled with
``numba.njit``.  The compiled path is used unless ``TREEAUG_DISABLE_JIT`` is
set to a true value or numba cannot be imported.

Layout: inputs ``X`` are ``(T, B, D)``; ``mask`` is ``(T, B)`` with 1 for a
real step and 0 for padding.  On a padded step the cell and hidden state are
carried over unchanged, so ``hs[T]`` is the final state of every sequence
regardless of its length.  Gate order in the fused weights is
input, forget, output, candidate.
"""

import os

import numpy as np

__all__ = ["JIT_ENABLED", "lstm_forward", "lstm_backward", "numpy_kernels", "jit_kernels"]


def _lstm_forward(X, mask, Wx, Wh, b):
    T, B, _ = X.shape
    H = Wh.shape[0]
    hs = np.zeros((T + 1, B, H), dtype=X.dtype)
    cs = np.zeros((T + 1, B, H), dtype=X.dtype)
    c_new = np.zeros((T, B, H), dtype=X.dtype)
    gates = np.zeros((T, B, 4 * H), dtype=X.dtype)
    for t in range(T):
        a = np.dot(X[t], Wx) + np.dot(hs[t], Wh) + b
        i = 1.0 / (1.0 + np.exp(-a[:, :H]))
        f = 1.0 / (1.0 + np.exp(-a[:, H:2 * H]))
        o = 1.0 / (1.0 + np.exp(-a[:, 2 * H:3 * H]))
        g = np.tanh(a[:, 3 * H:])
        c = f * cs[t] + i * g
        h = o * np.tanh(c)
        m = mask[t].reshape((B, 1))
        cs[t + 1] = m * c + (1.0 - m) * cs[t]
        hs[t + 1] = m * h + (1.0 - m) * hs[t]
        c_new[t] = c
        gates[t, :, :H] = i
        gates[t, :, H:2 * H] = f
        gates[t, :, 2 * H:3 * H] = o
        gates[t, :, 3 * H:] = g
    return hs, cs, c_new, gates


def _lstm_backward(dH, X, mask, Wx, Wh, hs, cs, c_new, gates):
    """Gradients given ``dH[t] = dL/dhs[t + 1]``; returns dX, dWx, dWh, db."""
    T, B, _ = X.shape
    H = Wh.shape[0]
    dX = np.zeros_like(X)
    dWx = np.zeros_like(Wx)
    dWh = np.zeros_like(Wh)
    db = np.zeros(4 * H, dtype=X.dtype)
    da = np.zeros((B, 4 * H), dtype=X.dtype)
    dh_next = np.zeros((B, H), dtype=X.dtype)
    dc_next = np.zeros((B, H), dtype=X.dtype)
    WxT = np.ascontiguousarray(Wx.T)
    WhT = np.ascontiguousarray(Wh.T)
    for t in range(T - 1, -1, -1):
        m = mask[t].reshape((B, 1))
        dh = dH[t] + dh_next
        i = gates[t, :, :H]
        f = gates[t, :, H:2 * H]
        o = gates[t, :, 2 * H:3 * H]
        g = gates[t, :, 3 * H:]
        tc = np.tanh(c_new[t])
        dh_step = m * dh
        dc = m * dc_next + dh_step * o * (1.0 - tc * tc)
        da[:, :H] = dc * g * i * (1.0 - i)
        da[:, H:2 * H] = dc * cs[t] * f * (1.0 - f)
        da[:, 2 * H:3 * H] = dh_step * tc * o * (1.0 - o)
        da[:, 3 * H:] = dc * i * (1.0 - g * g)
        dWx += np.dot(np.ascontiguousarray(X[t].T), da)
        dWh += np.dot(np.ascontiguousarray(hs[t].T), da)
        db += da.sum(axis=0)
        dX[t] = np.dot(da, WxT)
        # in-place so float32 inputs keep float32 carries
        dh_next[:] = np.dot(da, WhT) + (1.0 - m) * dh
        dc_next[:] = dc * f + (1.0 - m) * dc_next
    return dX, dWx, dWh, db


numpy_kernels = (_lstm_forward, _lstm_backward)


def _jit_enabled_by_env():
    return os.environ.get("TREEAUG_DISABLE_JIT", "").strip().lower() not in ("1", "true", "yes", "on")


jit_kernels = None
try:
    import numba

    jit_kernels = (numba.njit(cache=True)(_lstm_forward), numba.njit(cache=True)(_lstm_backward))
except ImportError:  # pragma: no cover - numba is a declared dependency
    pass

JIT_ENABLED = jit_kernels is not None and _jit_enabled_by_env()

lstm_forward, lstm_backward = jit_kernels if JIT_ENABLED else numpy_kernels

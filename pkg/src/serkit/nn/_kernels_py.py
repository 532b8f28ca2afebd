"""Numpy implementations of the hot kernels.

Reference semantics for the compiled extension in _kernels.pyx: both
backends expose the same functions with identical shapes and conventions,
and the test suite holds them to near-bit agreement.

LSTM gate layout along the last axis is [input | forget | candidate |
output]; `gates` caches post-nonlinearity activations for the backward
pass.
"""

from __future__ import annotations

import numpy as np

NAME = "python"


def _sigmoid(z):
    out = np.empty_like(z)
    pos = z >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-z[pos]))
    ez = np.exp(z[~pos])
    out[~pos] = ez / (1.0 + ez)
    return out


def lstm_loop_forward(xp: np.ndarray, wh: np.ndarray, h0: np.ndarray, c0: np.ndarray):
    """Run the recurrence over time-major pre-activations.

    xp: (T, B, 4H) input projections plus bias, already computed.
    Returns (h, c, gates) with h, c: (T, B, H) and gates: (T, B, 4H).
    """
    t_steps, batch, gate_width = xp.shape
    hidden = gate_width // 4
    h = np.empty((t_steps, batch, hidden))
    c = np.empty((t_steps, batch, hidden))
    gates = np.empty((t_steps, batch, gate_width))
    h_prev, c_prev = h0, c0
    for t in range(t_steps):
        g = xp[t] + h_prev @ wh
        i = _sigmoid(g[:, :hidden])
        f = _sigmoid(g[:, hidden : 2 * hidden])
        cand = np.tanh(g[:, 2 * hidden : 3 * hidden])
        o = _sigmoid(g[:, 3 * hidden :])
        c_prev = f * c_prev + i * cand
        h_prev = o * np.tanh(c_prev)
        gates[t, :, :hidden] = i
        gates[t, :, hidden : 2 * hidden] = f
        gates[t, :, 2 * hidden : 3 * hidden] = cand
        gates[t, :, 3 * hidden :] = o
        h[t] = h_prev
        c[t] = c_prev
    return h, c, gates


def lstm_loop_backward(dh_out: np.ndarray, h: np.ndarray, c: np.ndarray,
                       gates: np.ndarray, wh: np.ndarray,
                       h0: np.ndarray, c0: np.ndarray):
    """Backpropagation through time for lstm_loop_forward.

    dh_out: (T, B, H) upstream gradient on every hidden state.
    Returns (dxp, dwh, dh0, dc0).
    """
    t_steps, batch, hidden = dh_out.shape
    dxp = np.empty((t_steps, batch, 4 * hidden))
    dwh = np.zeros_like(wh)
    dh_next = np.zeros((batch, hidden))
    dc_next = np.zeros((batch, hidden))
    for t in range(t_steps - 1, -1, -1):
        i = gates[t, :, :hidden]
        f = gates[t, :, hidden : 2 * hidden]
        cand = gates[t, :, 2 * hidden : 3 * hidden]
        o = gates[t, :, 3 * hidden :]
        c_prev = c[t - 1] if t > 0 else c0
        h_prev = h[t - 1] if t > 0 else h0

        dh = dh_out[t] + dh_next
        tc = np.tanh(c[t])
        dc = dc_next + dh * o * (1.0 - tc * tc)
        dg = np.empty((batch, 4 * hidden))
        dg[:, :hidden] = dc * cand * i * (1.0 - i)
        dg[:, hidden : 2 * hidden] = dc * c_prev * f * (1.0 - f)
        dg[:, 2 * hidden : 3 * hidden] = dc * i * (1.0 - cand * cand)
        dg[:, 3 * hidden :] = dh * tc * o * (1.0 - o)

        dxp[t] = dg
        dwh += h_prev.T @ dg
        dh_next = dg @ wh.T
        dc_next = dc * f
    return dxp, dwh, dh_next, dc_next


def conv1d_forward(x: np.ndarray, w: np.ndarray, b: np.ndarray, stride: int) -> np.ndarray:
    """Valid cross-correlation: x (B, T, Cin), w (K, Cin, Cout) -> (B, To, Cout)."""
    batch, t_in, c_in = x.shape
    k, _, c_out = w.shape
    t_out = (t_in - k) // stride + 1
    cols = _im2col(x, k, stride, t_out)
    y = cols.reshape(batch * t_out, k * c_in) @ w.reshape(k * c_in, c_out)
    return y.reshape(batch, t_out, c_out) + b[None, None, :]


def conv1d_backward(x: np.ndarray, w: np.ndarray, stride: int, dy: np.ndarray):
    """Gradients of conv1d_forward: returns (dx, dw, db)."""
    batch, t_in, c_in = x.shape
    k, _, c_out = w.shape
    t_out = dy.shape[1]
    cols = _im2col(x, k, stride, t_out).reshape(batch * t_out, k * c_in)
    dy_flat = dy.reshape(batch * t_out, c_out)
    dw = (cols.T @ dy_flat).reshape(k, c_in, c_out)
    db = dy_flat.sum(axis=0)
    dcols = (dy_flat @ w.reshape(k * c_in, c_out).T).reshape(batch, t_out, k, c_in)
    dx = np.zeros_like(x)
    for j in range(k):
        # for a fixed tap, output windows touch distinct input rows
        dx[:, j : j + stride * t_out : stride, :] += dcols[:, :, j, :]
    return dx, dw, db


def _im2col(x: np.ndarray, k: int, stride: int, t_out: int) -> np.ndarray:
    batch, _, c_in = x.shape
    idx = stride * np.arange(t_out)[:, None] + np.arange(k)[None, :]
    return x[:, idx, :]  # (B, To, K, Cin)


def maxpool1d_forward(x: np.ndarray, pool: int, stride: int):
    """Windowed max over time: returns (y, argmax) with absolute time indices.

    Ties go to the earliest element of the window.
    """
    batch, t_in, ch = x.shape
    t_out = (t_in - pool) // stride + 1
    idx = stride * np.arange(t_out)[:, None] + np.arange(pool)[None, :]
    windows = x[:, idx, :]  # (B, To, P, C)
    local = windows.argmax(axis=2)
    argmax = local + (stride * np.arange(t_out))[None, :, None]
    y = np.take_along_axis(windows, local[:, :, None, :], axis=2)[:, :, 0, :]
    return y, argmax


def maxpool1d_backward(dy: np.ndarray, argmax: np.ndarray, t_in: int) -> np.ndarray:
    """Route gradients back to the winning positions (accumulating overlaps)."""
    batch, t_out, ch = dy.shape
    dx = np.zeros((batch, t_in, ch))
    b_idx = np.arange(batch)[:, None, None]
    c_idx = np.arange(ch)[None, None, :]
    np.add.at(dx, (b_idx, argmax, c_idx), dy)
    return dx

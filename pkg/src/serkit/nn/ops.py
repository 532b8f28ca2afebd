"""Functional forward/backward pairs for every network operation.

Each forward returns (output, cache); the matching backward consumes the
cache and returns input and parameter gradients. Hot sequence kernels
(LSTM recurrence, conv, pooling) dispatch to the active backend; the rest
is straightforward numpy.

Everything is float64 and single-threaded per call, so a fixed seed gives
bit-identical trajectories.
"""

from __future__ import annotations

import numpy as np

from ..errors import BatchTooSmall, LabelOutOfRange, ShapeMismatch
from ._backend import kernels

BN_EPS = 1e-5
BN_MOMENTUM = 0.9


def _c(x):
    return np.ascontiguousarray(x, dtype=np.float64)


# -- dense --------------------------------------------------------------------

def dense_forward(x, w, b):
    """y = x @ w + b for x (B, In), w (In, Out)."""
    if x.ndim != 2 or x.shape[1] != w.shape[0]:
        raise ShapeMismatch(f"dense: x {x.shape} vs w {w.shape}")
    return x @ w + b, (x, w)


def dense_backward(dy, cache):
    x, w = cache
    return dy @ w.T, x.T @ dy, dy.sum(axis=0)


# -- batch normalization ------------------------------------------------------

def batchnorm_forward(x, gamma, beta, running_mean, running_var, mode):
    """Normalize per feature; train mode also updates the running stats in place."""
    if mode == "train":
        if x.shape[0] < 2:
            raise BatchTooSmall(f"batchnorm needs batch >= 2 in train mode, got {x.shape[0]}")
        mean = x.mean(axis=0)
        var = x.var(axis=0)
        running_mean *= BN_MOMENTUM
        running_mean += (1.0 - BN_MOMENTUM) * mean
        running_var *= BN_MOMENTUM
        running_var += (1.0 - BN_MOMENTUM) * var
    else:
        mean, var = running_mean, running_var
    inv_std = 1.0 / np.sqrt(var + BN_EPS)
    xhat = (x - mean) * inv_std
    return gamma * xhat + beta, (xhat, inv_std, gamma, mode)


def batchnorm_backward(dy, cache):
    xhat, inv_std, gamma, mode = cache
    dgamma = (dy * xhat).sum(axis=0)
    dbeta = dy.sum(axis=0)
    dxhat = dy * gamma
    if mode == "train":
        n = xhat.shape[0]
        dx = inv_std * (dxhat - dxhat.mean(axis=0) - xhat * (dxhat * xhat).mean(axis=0))
        # note: mean terms above already divide by n
    else:
        dx = dxhat * inv_std
    return dx, dgamma, dbeta


# -- dropout ------------------------------------------------------------------

def dropout_forward(x, rate, mode, rng):
    """Inverted dropout: zero with probability rate, survivors scaled up."""
    if not 0.0 <= rate < 1.0:
        raise ValueError(f"dropout rate must be in [0, 1), got {rate}")
    if mode != "train" or rate == 0.0:
        return x, None
    mask = (rng.random(x.shape) >= rate) / (1.0 - rate)
    return x * mask, mask


def dropout_backward(dy, mask):
    return dy if mask is None else dy * mask


# -- convolution and pooling --------------------------------------------------

def conv1d_forward(x, w, b, stride=1):
    """x (B, T, Cin) with kernels (K, Cin, Cout), valid padding."""
    if x.ndim != 3 or w.ndim != 3 or x.shape[2] != w.shape[1]:
        raise ShapeMismatch(f"conv1d: x {x.shape} vs kernels {w.shape}")
    if w.shape[0] > x.shape[1]:
        raise ShapeMismatch(f"conv1d: kernel {w.shape[0]} longer than time axis {x.shape[1]}")
    x = _c(x)
    y = kernels.conv1d_forward(x, _c(w), _c(b), int(stride))
    return y, (x, w, stride)


def conv1d_backward(dy, cache):
    x, w, stride = cache
    return kernels.conv1d_backward(x, _c(w), int(stride), _c(dy))


def maxpool1d_forward(x, pool, stride=None):
    """Windowed max over time; stride defaults to the pool width."""
    stride = pool if stride is None else stride
    if x.ndim != 3 or pool > x.shape[1]:
        raise ShapeMismatch(f"maxpool1d: pool {pool} vs input {x.shape}")
    x = _c(x)
    y, argmax = kernels.maxpool1d_forward(x, int(pool), int(stride))
    return y, (argmax, x.shape[1])


def maxpool1d_backward(dy, cache):
    argmax, t_in = cache
    return kernels.maxpool1d_backward(_c(dy), argmax, int(t_in))


# -- recurrence ---------------------------------------------------------------

def lstm_forward(x, wx, wh, b, h0=None, c0=None):
    """Full-sequence LSTM over x (B, T, In); returns hidden states (B, T, H).

    Gate layout along the packed axis is [input | forget | candidate |
    output]; wx (In, 4H), wh (H, 4H), b (4H,).
    """
    if x.ndim != 3 or x.shape[2] != wx.shape[0]:
        raise ShapeMismatch(f"lstm: x {x.shape} vs wx {wx.shape}")
    batch, t_steps, _ = x.shape
    hidden = wh.shape[0]
    if h0 is None:
        h0 = np.zeros((batch, hidden))
    if c0 is None:
        c0 = np.zeros((batch, hidden))
    xp = _c((x.reshape(batch * t_steps, -1) @ wx + b).reshape(batch, t_steps, -1).transpose(1, 0, 2))
    h, c, gates = kernels.lstm_loop_forward(xp, _c(wh), _c(h0), _c(c0))
    cache = (x, wx, wh, h, c, gates, _c(h0), _c(c0))
    return h.transpose(1, 0, 2), cache


def lstm_backward(dh, cache):
    """Gradients for lstm_forward given dL/dh at every step (B, T, H).

    Returns (dx, dwx, dwh, db).
    """
    x, wx, wh, h, c, gates, h0, c0 = cache
    batch, t_steps, _ = x.shape
    dh_tm = _c(dh.transpose(1, 0, 2))
    dxp, dwh, _, _ = kernels.lstm_loop_backward(dh_tm, h, c, gates, _c(wh), h0, c0)
    dxp_bt = dxp.transpose(1, 0, 2).reshape(batch * t_steps, -1)
    x_flat = x.reshape(batch * t_steps, -1)
    dwx = x_flat.T @ dxp_bt
    db = dxp_bt.sum(axis=0)
    dx = (dxp_bt @ wx.T).reshape(x.shape)
    return dx, dwx, dwh, db


def blstm_forward(x, params_fwd, params_bwd):
    """Forward and time-reversed LSTM passes concatenated as [fwd, bwd]."""
    h_f, cache_f = lstm_forward(x, *params_fwd)
    h_b_rev, cache_b = lstm_forward(x[:, ::-1, :], *params_bwd)
    h_b = h_b_rev[:, ::-1, :]
    return np.concatenate([h_f, h_b], axis=2), (cache_f, cache_b, h_f.shape[2])


def blstm_backward(dh, cache):
    cache_f, cache_b, hidden = cache
    dx_f, dwx_f, dwh_f, db_f = lstm_backward(dh[:, :, :hidden], cache_f)
    dx_b_rev, dwx_b, dwh_b, db_b = lstm_backward(dh[:, ::-1, hidden:], cache_b)
    dx = dx_f + dx_b_rev[:, ::-1, :]
    return dx, (dwx_f, dwh_f, db_f), (dwx_b, dwh_b, db_b)


# -- attention pooling --------------------------------------------------------

def attention_pool_forward(h, w, b, v):
    """Additive attention over time: softmax(v . tanh(h W + b)) weighted sum.

    h (B, T, D) -> context (B, D), weights (B, T).
    """
    if h.ndim != 3 or h.shape[2] != w.shape[0]:
        raise ShapeMismatch(f"attention: h {h.shape} vs w {w.shape}")
    u = np.tanh(h @ w + b)          # (B, T, A)
    scores = u @ v                  # (B, T)
    scores = scores - scores.max(axis=1, keepdims=True)
    e = np.exp(scores)
    alpha = e / e.sum(axis=1, keepdims=True)
    context = np.einsum("bt,btd->bd", alpha, h)
    return context, alpha, (h, w, v, u, alpha)


def attention_pool_backward(dcontext, cache):
    """Returns (dh, dw, db, dv)."""
    h, w, v, u, alpha = cache
    dalpha = np.einsum("bd,btd->bt", dcontext, h)
    dh = alpha[:, :, None] * dcontext[:, None, :]
    dscore = alpha * (dalpha - (alpha * dalpha).sum(axis=1, keepdims=True))
    dv = np.einsum("bt,bta->a", dscore, u)
    du = dscore[:, :, None] * v[None, None, :] * (1.0 - u * u)
    dw = np.einsum("btd,bta->da", h, du)
    db = du.sum(axis=(0, 1))
    dh += du @ w.T
    return dh, dw, db, dv


# -- loss ---------------------------------------------------------------------

def softmax(logits):
    z = logits - logits.max(axis=-1, keepdims=True)
    e = np.exp(z)
    return e / e.sum(axis=-1, keepdims=True)


def softmax_cross_entropy(logits, labels):
    """Mean negative log-likelihood; returns (loss, dlogits).

    Stabilized with log-sum-exp; gradient is (softmax - onehot) / batch.
    """
    labels = np.asarray(labels)
    batch, num_classes = logits.shape
    if labels.shape != (batch,):
        raise ShapeMismatch(f"labels {labels.shape} vs logits {logits.shape}")
    if labels.min() < 0 or labels.max() >= num_classes:
        raise LabelOutOfRange(f"labels must lie in [0, {num_classes})")
    z = logits - logits.max(axis=1, keepdims=True)
    log_probs = z - np.log(np.exp(z).sum(axis=1, keepdims=True))
    loss = -log_probs[np.arange(batch), labels].mean()
    dlogits = np.exp(log_probs)
    dlogits[np.arange(batch), labels] -= 1.0
    return loss, dlogits / batch

"""Layer objects with owned parameters, built on the functional ops.

A Layer keeps its parameters, matching gradient buffers, and any
non-trainable state (running statistics) in plain dicts so optimizers and
checkpoints can walk them by name. forward(x, rng) caches whatever the
backward pass needs; backward(dy) returns dL/dx and accumulates parameter
gradients in place.
"""

from __future__ import annotations

import numpy as np

from ..errors import ShapeMismatch
from . import ops


def glorot_uniform(rng, fan_in, fan_out, shape):
    bound = np.sqrt(6.0 / (fan_in + fan_out))
    return rng.uniform(-bound, bound, size=shape)


class Layer:
    """Base contract: params/grads/buffers dicts plus forward/backward."""

    def __init__(self):
        self.params: dict[str, np.ndarray] = {}
        self.grads: dict[str, np.ndarray] = {}
        self.buffers: dict[str, np.ndarray] = {}
        self.mode = "train"
        self._cache = None

    def forward(self, x, rng=None):
        raise NotImplementedError

    def backward(self, dy):
        raise NotImplementedError

    def set_mode(self, mode):
        if mode not in ("train", "eval"):
            raise ValueError(f"mode must be train or eval, got {mode!r}")
        self.mode = mode

    def zero_grads(self):
        for g in self.grads.values():
            g[...] = 0.0

    def _register(self, name, value):
        value = np.asarray(value, dtype=np.float64)
        self.params[name] = value
        self.grads[name] = np.zeros_like(value)
        return value


class Dense(Layer):
    def __init__(self, n_in, n_out, rng):
        super().__init__()
        self.n_in, self.n_out = n_in, n_out
        self._register("w", glorot_uniform(rng, n_in, n_out, (n_in, n_out)))
        self._register("b", np.zeros(n_out))

    def forward(self, x, rng=None):
        y, self._cache = ops.dense_forward(x, self.params["w"], self.params["b"])
        return y

    def backward(self, dy):
        dx, dw, db = ops.dense_backward(dy, self._cache)
        self.grads["w"] += dw
        self.grads["b"] += db
        return dx


class ReLU(Layer):
    def forward(self, x, rng=None):
        self._cache = x > 0
        return x * self._cache

    def backward(self, dy):
        return dy * self._cache


class Tanh(Layer):
    def forward(self, x, rng=None):
        y = np.tanh(x)
        self._cache = y
        return y

    def backward(self, dy):
        return dy * (1.0 - self._cache ** 2)


class BatchNorm(Layer):
    """Per-feature normalization over the batch axis of a 2-D input."""

    def __init__(self, dim):
        super().__init__()
        self.dim = dim
        self._register("gamma", np.ones(dim))
        self._register("beta", np.zeros(dim))
        self.buffers["running_mean"] = np.zeros(dim)
        self.buffers["running_var"] = np.ones(dim)

    def forward(self, x, rng=None):
        y, self._cache = ops.batchnorm_forward(
            x, self.params["gamma"], self.params["beta"],
            self.buffers["running_mean"], self.buffers["running_var"], self.mode)
        return y

    def backward(self, dy):
        dx, dgamma, dbeta = ops.batchnorm_backward(dy, self._cache)
        self.grads["gamma"] += dgamma
        self.grads["beta"] += dbeta
        return dx


class Dropout(Layer):
    def __init__(self, rate):
        super().__init__()
        self.rate = float(rate)

    def forward(self, x, rng=None):
        if self.mode == "train" and self.rate > 0.0 and rng is None:
            raise ValueError("dropout in train mode needs an rng")
        y, self._cache = ops.dropout_forward(x, self.rate, self.mode, rng)
        return y

    def backward(self, dy):
        return ops.dropout_backward(dy, self._cache)


class Conv1D(Layer):
    """Valid-padding cross-correlation over (batch, time, channels)."""

    def __init__(self, ch_in, ch_out, kernel, rng, stride=1):
        super().__init__()
        self.ch_in, self.ch_out = ch_in, ch_out
        self.kernel, self.stride = kernel, stride
        self._register("w", glorot_uniform(
            rng, kernel * ch_in, kernel * ch_out, (kernel, ch_in, ch_out)))
        self._register("b", np.zeros(ch_out))

    def forward(self, x, rng=None):
        y, self._cache = ops.conv1d_forward(
            x, self.params["w"], self.params["b"], self.stride)
        return y

    def backward(self, dy):
        dx, dw, db = ops.conv1d_backward(dy, self._cache)
        self.grads["w"] += dw
        self.grads["b"] += db
        return dx


class MaxPool1D(Layer):
    def __init__(self, pool, stride=None):
        super().__init__()
        self.pool = pool
        self.stride = pool if stride is None else stride

    def forward(self, x, rng=None):
        y, self._cache = ops.maxpool1d_forward(x, self.pool, self.stride)
        return y

    def backward(self, dy):
        return ops.maxpool1d_backward(dy, self._cache)


def _lstm_params(layer, prefix, n_in, hidden, rng):
    """Packed-gate LSTM parameters: input blocks Glorot, recurrent +-sqrt(1/h),
    forget-gate bias +1. Gate order [input | forget | candidate | output]."""
    wx = glorot_uniform(rng, n_in, hidden, (n_in, 4 * hidden))
    bound = np.sqrt(1.0 / hidden)
    wh = rng.uniform(-bound, bound, size=(hidden, 4 * hidden))
    b = np.zeros(4 * hidden)
    b[hidden:2 * hidden] = 1.0
    layer._register(prefix + "wx", wx)
    layer._register(prefix + "wh", wh)
    layer._register(prefix + "b", b)


class LSTM(Layer):
    """Unidirectional LSTM returning the full hidden-state sequence."""

    def __init__(self, n_in, hidden, rng):
        super().__init__()
        self.n_in, self.hidden = n_in, hidden
        _lstm_params(self, "", n_in, hidden, rng)

    def forward(self, x, rng=None):
        h, self._cache = ops.lstm_forward(
            x, self.params["wx"], self.params["wh"], self.params["b"])
        return h

    def backward(self, dy):
        dx, dwx, dwh, db = ops.lstm_backward(dy, self._cache)
        self.grads["wx"] += dwx
        self.grads["wh"] += dwh
        self.grads["b"] += db
        return dx


class BLSTM(Layer):
    """Bidirectional LSTM; output is [forward, backward] along features."""

    def __init__(self, n_in, hidden, rng):
        super().__init__()
        self.n_in, self.hidden = n_in, hidden
        _lstm_params(self, "fwd_", n_in, hidden, rng)
        _lstm_params(self, "bwd_", n_in, hidden, rng)

    def forward(self, x, rng=None):
        p = self.params
        y, self._cache = ops.blstm_forward(
            x, (p["fwd_wx"], p["fwd_wh"], p["fwd_b"]),
            (p["bwd_wx"], p["bwd_wh"], p["bwd_b"]))
        return y

    def backward(self, dy):
        dx, grads_f, grads_b = ops.blstm_backward(dy, self._cache)
        for key, g in zip(("wx", "wh", "b"), grads_f):
            self.grads["fwd_" + key] += g
        for key, g in zip(("wx", "wh", "b"), grads_b):
            self.grads["bwd_" + key] += g
        return dx


class AttentionPool(Layer):
    """Additive attention over time, collapsing (B, T, D) to (B, D).

    The per-frame weights from the most recent forward pass stay readable
    on .last_weights for inspection.
    """

    def __init__(self, dim, attn_dim, rng):
        super().__init__()
        self.dim, self.attn_dim = dim, attn_dim
        self._register("w", glorot_uniform(rng, dim, attn_dim, (dim, attn_dim)))
        self._register("b", np.zeros(attn_dim))
        self._register("v", glorot_uniform(rng, attn_dim, 1, (attn_dim,)))
        self.last_weights = None

    def forward(self, x, rng=None):
        context, alpha, self._cache = ops.attention_pool_forward(
            x, self.params["w"], self.params["b"], self.params["v"])
        self.last_weights = alpha
        return context

    def backward(self, dy):
        dx, dw, db, dv = ops.attention_pool_backward(dy, self._cache)
        self.grads["w"] += dw
        self.grads["b"] += db
        self.grads["v"] += dv
        return dx


class Flatten(Layer):
    def forward(self, x, rng=None):
        self._cache = x.shape
        return x.reshape(x.shape[0], -1)

    def backward(self, dy):
        return dy.reshape(self._cache)


class GlobalMaxPool(Layer):
    """Max over the time axis of (B, T, C); gradient to the first argmax."""

    def forward(self, x, rng=None):
        idx = x.argmax(axis=1)
        self._cache = (idx, x.shape)
        return np.take_along_axis(x, idx[:, None, :], axis=1)[:, 0, :]

    def backward(self, dy):
        idx, shape = self._cache
        dx = np.zeros(shape)
        np.put_along_axis(dx, idx[:, None, :], dy[:, None, :], axis=1)
        return dx


class LastStepConcat(Layer):
    """Fixed-length readout of a BLSTM sequence (B, T, 2H).

    Concatenates each direction's own final state: the forward half at the
    last time step with the backward half at the first aligned step (the
    backward pass's final step).
    """

    def __init__(self, hidden):
        super().__init__()
        self.hidden = hidden

    def forward(self, x, rng=None):
        h = self.hidden
        if x.ndim != 3 or x.shape[2] != 2 * h:
            raise ShapeMismatch(f"expected (B, T, {2 * h}), got {x.shape}")
        self._cache = x.shape
        return np.concatenate([x[:, -1, :h], x[:, 0, h:]], axis=1)

    def backward(self, dy):
        shape = self._cache
        h = self.hidden
        dx = np.zeros(shape)
        dx[:, -1, :h] = dy[:, :h]
        dx[:, 0, h:] = dy[:, h:]
        return dx


class Reshape(Layer):
    """Reshape the per-example trailing axes; batch axis is preserved."""

    def __init__(self, target):
        super().__init__()
        self.target = tuple(target)

    def forward(self, x, rng=None):
        self._cache = x.shape
        return x.reshape((x.shape[0],) + self.target)

    def backward(self, dy):
        return dy.reshape(self._cache)


class Sequential(Layer):
    """Ordered layer chain with flat name.param addressing."""

    def __init__(self, layers):
        super().__init__()
        self.layers = list(layers)

    def forward(self, x, rng=None):
        for layer in self.layers:
            x = layer.forward(x, rng)
        return x

    def backward(self, dy):
        for layer in reversed(self.layers):
            dy = layer.backward(dy)
        return dy

    def set_mode(self, mode):
        super().set_mode(mode)
        for layer in self.layers:
            layer.set_mode(mode)

    def zero_grads(self):
        for layer in self.layers:
            layer.zero_grads()

    def named_params(self):
        """Yields (name, param, grad) with names stable across runs."""
        for i, layer in enumerate(self.layers):
            for key in layer.params:
                yield f"{i}.{key}", layer.params[key], layer.grads[key]

    def state_dict(self):
        out = {}
        for i, layer in enumerate(self.layers):
            for key, val in layer.params.items():
                out[f"{i}.{key}"] = val.copy()
            for key, val in layer.buffers.items():
                out[f"{i}.buffers.{key}"] = val.copy()
        return out

    def load_state_dict(self, state):
        expected = set()
        for i, layer in enumerate(self.layers):
            for key in layer.params:
                name = f"{i}.{key}"
                expected.add(name)
                if name not in state:
                    raise ShapeMismatch(f"checkpoint missing tensor {name}")
                if state[name].shape != layer.params[key].shape:
                    raise ShapeMismatch(
                        f"{name}: checkpoint {state[name].shape} vs model "
                        f"{layer.params[key].shape}")
                layer.params[key][...] = state[name]
            for key in layer.buffers:
                name = f"{i}.buffers.{key}"
                expected.add(name)
                if name not in state:
                    raise ShapeMismatch(f"checkpoint missing tensor {name}")
                layer.buffers[key][...] = state[name]
        extra = set(state) - expected
        if extra:
            raise ShapeMismatch(f"checkpoint has unexpected tensors: {sorted(extra)}")

    def num_params(self):
        return sum(p.size for _, p, _ in self.named_params())

"""Model zoo: four frame-level architectures and three utterance-level ones.

Frame-level kinds consume (frames, 52) descriptor matrices; functional
kinds consume flat feature vectors. All neural kinds share the Sequential
engine; the linear-SVM baseline lives in serkit.svm and is dispatched by
kind at the harness level.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .errors import ConfigInvalid, IncompatibleShape
from .nn import (
    AttentionPool,
    BatchNorm,
    BLSTM,
    Conv1D,
    Dense,
    Dropout,
    Flatten,
    GlobalMaxPool,
    LastStepConcat,
    MaxPool1D,
    ReLU,
    Reshape,
    Sequential,
    softmax,
)

FRAME_KINDS = ("dnn_frames", "blstm", "attn_blstm", "cnn_attn_blstm")
FUNC_KINDS = ("dnn_func", "cnn_func", "svm_func")
MODEL_KINDS = FRAME_KINDS + FUNC_KINDS

NUM_CLASSES = 5


@dataclass
class ModelSpec:
    """Architecture selector plus the per-kind size knobs.

    Sizes are documented defaults, not published values; every knob can be
    overridden from experiment configs.
    """

    kind: str
    num_classes: int = NUM_CLASSES
    dense_sizes: tuple = (512, 256, 128)
    dropout: float = 0.3
    hidden: int = 128
    attn_dim: int = 128
    conv_channels: int = 64
    conv_kernel: int = 5
    pool: int = 2
    func_conv_channels: int = 32
    func_conv_kernel: int = 8
    func_conv_stride: int = 2
    svm_c: float = 1.0

    def __post_init__(self):
        if self.kind not in MODEL_KINDS:
            raise ConfigInvalid(f"unknown model kind {self.kind!r}; choose from {MODEL_KINDS}")
        if self.num_classes != NUM_CLASSES:
            raise ConfigInvalid(f"num_classes is fixed at {NUM_CLASSES}, got {self.num_classes}")
        if not 0.0 <= self.dropout < 1.0:
            raise ConfigInvalid("dropout must lie in [0, 1)")
        if not self.dense_sizes or any(s < 1 for s in self.dense_sizes):
            raise ConfigInvalid("dense_sizes must be positive")
        for name in ("hidden", "attn_dim", "conv_channels", "conv_kernel",
                     "pool", "func_conv_channels", "func_conv_kernel",
                     "func_conv_stride"):
            if getattr(self, name) < 1:
                raise ConfigInvalid(f"{name} must be at least 1")
        if self.svm_c <= 0:
            raise ConfigInvalid("svm_c must be positive")
        self.dense_sizes = tuple(int(s) for s in self.dense_sizes)

    def to_dict(self):
        return {
            "kind": self.kind, "num_classes": self.num_classes,
            "dense_sizes": list(self.dense_sizes), "dropout": self.dropout,
            "hidden": self.hidden, "attn_dim": self.attn_dim,
            "conv_channels": self.conv_channels, "conv_kernel": self.conv_kernel,
            "pool": self.pool, "func_conv_channels": self.func_conv_channels,
            "func_conv_kernel": self.func_conv_kernel,
            "func_conv_stride": self.func_conv_stride, "svm_c": self.svm_c,
        }

    @classmethod
    def from_dict(cls, data):
        known = set(cls.__dataclass_fields__)
        extra = set(data) - known
        if extra:
            raise ConfigInvalid(f"unknown model options: {sorted(extra)}")
        data = dict(data)
        if "dense_sizes" in data:
            data["dense_sizes"] = tuple(data["dense_sizes"])
        return cls(**data)


@dataclass
class Prediction:
    class_index: int
    probabilities: np.ndarray
    attention_weights: Optional[np.ndarray] = None


@dataclass
class Model:
    spec: ModelSpec
    net: Sequential
    input_shape: tuple
    attention: Optional[AttentionPool] = field(default=None, repr=False)

    def num_params(self):
        return self.net.num_params()


def _dense_block(sizes, n_in, dropout, rng):
    layers = []
    prev = n_in
    for size in sizes:
        layers += [Dense(prev, size, rng), BatchNorm(size), ReLU(), Dropout(dropout)]
        prev = size
    return layers, prev


def _conv_out(t, kernel, stride):
    return (t - kernel) // stride + 1


def build(spec: ModelSpec, input_shape, seed=0):
    """Wire the layer stack for spec over the given input shape.

    input_shape is (frames, n_llds) for frame-level kinds and an integer
    (or 1-tuple) feature dimension for functional-level kinds. Weights are
    drawn from a generator seeded with seed.
    """
    if spec.kind == "svm_func":
        raise ConfigInvalid("svm_func has no layer stack; train it with serkit.svm.svm_train")
    rng = np.random.default_rng(seed)
    k = spec.kind

    if k in FRAME_KINDS:
        if not (isinstance(input_shape, tuple) and len(input_shape) == 2):
            raise IncompatibleShape(f"{k} expects (frames, features), got {input_shape!r}")
        t_in, d_in = int(input_shape[0]), int(input_shape[1])
        if t_in < 1 or d_in < 1:
            raise IncompatibleShape(f"bad frame-level input shape {input_shape!r}")
        attention = None
        if k == "dnn_frames":
            blocks, prev = _dense_block(spec.dense_sizes, t_in * d_in, spec.dropout, rng)
            layers = [Flatten()] + blocks + [Dense(prev, spec.num_classes, rng)]
        elif k == "blstm":
            layers = [BLSTM(d_in, spec.hidden, rng),
                      LastStepConcat(spec.hidden),
                      Dense(2 * spec.hidden, spec.num_classes, rng)]
        elif k == "attn_blstm":
            attention = AttentionPool(2 * spec.hidden, spec.attn_dim, rng)
            layers = [BLSTM(d_in, spec.hidden, rng), attention,
                      Dense(2 * spec.hidden, spec.num_classes, rng)]
        else:  # cnn_attn_blstm
            t = t_in
            for stage in (1, 2):
                t = _conv_out(t, spec.conv_kernel, 1)
                t = _conv_out(t, spec.pool, spec.pool)
            if t < 1:
                raise IncompatibleShape(
                    f"{t_in} frames collapse below 1 step after two conv/pool stages")
            attention = AttentionPool(2 * spec.hidden, spec.attn_dim, rng)
            layers = [
                Conv1D(d_in, spec.conv_channels, spec.conv_kernel, rng), ReLU(),
                MaxPool1D(spec.pool),
                Conv1D(spec.conv_channels, spec.conv_channels, spec.conv_kernel, rng), ReLU(),
                MaxPool1D(spec.pool),
                BLSTM(spec.conv_channels, spec.hidden, rng), attention,
                Dense(2 * spec.hidden, spec.num_classes, rng),
            ]
        net = Sequential(layers)
        return Model(spec=spec, net=net, input_shape=(t_in, d_in), attention=attention)

    # functional-level kinds
    if isinstance(input_shape, tuple):
        if len(input_shape) != 1:
            raise IncompatibleShape(f"{k} expects a flat dimension, got {input_shape!r}")
        d_in = int(input_shape[0])
    else:
        d_in = int(input_shape)
    if d_in < 1:
        raise IncompatibleShape(f"bad feature dimension {d_in}")
    if k == "dnn_func":
        blocks, prev = _dense_block(spec.dense_sizes, d_in, spec.dropout, rng)
        layers = blocks + [Dense(prev, spec.num_classes, rng)]
    else:  # cnn_func
        t = d_in
        for stage in (1, 2):
            t = _conv_out(t, spec.func_conv_kernel, spec.func_conv_stride)
        if t < 1:
            raise IncompatibleShape(
                f"feature dimension {d_in} collapses below 1 step in the conv stack")
        c = spec.func_conv_channels
        layers = [
            Reshape((d_in, 1)),
            Conv1D(1, c, spec.func_conv_kernel, rng, stride=spec.func_conv_stride), ReLU(),
            Conv1D(c, c, spec.func_conv_kernel, rng, stride=spec.func_conv_stride), ReLU(),
            GlobalMaxPool(),
            Dense(c, spec.num_classes, rng),
        ]
    net = Sequential(layers)
    return Model(spec=spec, net=net, input_shape=(d_in,), attention=None)


def forward_logits(model: Model, batch):
    """Eval-mode logits for a (batch, ...) input array."""
    batch = np.asarray(batch, dtype=np.float64)
    expected = (len(batch),) + model.input_shape
    if batch.shape != expected:
        raise IncompatibleShape(f"expected batch shape {expected}, got {batch.shape}")
    model.net.set_mode("eval")
    return model.net.forward(batch)


def predict(model: Model, x) -> Prediction:
    """Classify one utterance; attention kinds report their frame weights."""
    x = np.asarray(x, dtype=np.float64)
    if x.shape != model.input_shape:
        raise IncompatibleShape(f"expected input shape {model.input_shape}, got {x.shape}")
    logits = forward_logits(model, x[None])
    probs = softmax(logits)[0]
    weights = None
    if model.attention is not None:
        weights = model.attention.last_weights[0].copy()
    return Prediction(class_index=int(np.argmax(probs)),
                      probabilities=probs,
                      attention_weights=weights)

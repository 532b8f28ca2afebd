"""Parameter-update rules. State is keyed by parameter name so a single
optimizer instance can drive a whole Sequential model."""

from __future__ import annotations

import numpy as np

from ..errors import ShapeMismatch


class SGD:
    """Plain gradient descent: p -= lr * g."""

    def __init__(self, learning_rate):
        if learning_rate <= 0:
            raise ValueError("learning_rate must be positive")
        self.learning_rate = float(learning_rate)

    def step(self, named_params):
        for name, p, g in named_params:
            if p.shape != g.shape:
                raise ShapeMismatch(f"{name}: param {p.shape} vs grad {g.shape}")
            p -= self.learning_rate * g


class Adam:
    """Adam with bias-corrected first/second moments."""

    def __init__(self, learning_rate, beta1=0.9, beta2=0.999, eps=1e-8):
        if learning_rate <= 0:
            raise ValueError("learning_rate must be positive")
        self.learning_rate = float(learning_rate)
        self.beta1, self.beta2, self.eps = beta1, beta2, eps
        self.t = 0
        self.moments: dict[str, tuple[np.ndarray, np.ndarray]] = {}

    def step(self, named_params):
        self.t += 1
        b1, b2 = self.beta1, self.beta2
        scale = self.learning_rate * np.sqrt(1.0 - b2 ** self.t) / (1.0 - b1 ** self.t)
        for name, p, g in named_params:
            if p.shape != g.shape:
                raise ShapeMismatch(f"{name}: param {p.shape} vs grad {g.shape}")
            if name not in self.moments:
                self.moments[name] = (np.zeros_like(p), np.zeros_like(p))
            m, v = self.moments[name]
            m *= b1
            m += (1.0 - b1) * g
            v *= b2
            v += (1.0 - b2) * g * g
            p -= scale * m / (np.sqrt(v) + self.eps)


OPTIMIZERS = {"sgd": SGD, "adam": Adam}


def make_optimizer(name, learning_rate):
    try:
        cls = OPTIMIZERS[name]
    except KeyError:
        raise ValueError(f"unknown optimizer {name!r}; choose from {sorted(OPTIMIZERS)}") from None
    return cls(learning_rate)

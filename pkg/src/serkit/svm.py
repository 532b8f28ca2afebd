"""Linear one-vs-rest SVM baseline for utterance-level feature vectors.

Trained by deterministic full-batch subgradient descent on the
L2-regularized hinge loss with the usual 1/(lambda*t) step schedule
(lambda = 1/(C*n)). Features are z-scored inside svm_train; the learned
standardization travels with the model.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DegenerateLabels, ShapeMismatch
from .models import NUM_CLASSES
from .nn.ops import softmax


@dataclass
class SvmModel:
    weights: np.ndarray        # (num_classes, d)
    biases: np.ndarray         # (num_classes,)
    feature_mean: np.ndarray   # (d,)
    feature_scale: np.ndarray  # (d,)
    c: float

    @property
    def num_classes(self):
        return self.weights.shape[0]

    def decision_values(self, x):
        x = np.atleast_2d(np.asarray(x, dtype=np.float64))
        if x.shape[1] != self.weights.shape[1]:
            raise ShapeMismatch(f"expected {self.weights.shape[1]} features, got {x.shape[1]}")
        z = (x - self.feature_mean) / self.feature_scale
        return z @ self.weights.T + self.biases

    def predict(self, x):
        """Class indices for x (d,) or (n, d); argmax ties go to the lowest index."""
        scores = self.decision_values(x)
        out = scores.argmax(axis=1)
        return int(out[0]) if np.asarray(x).ndim == 1 else out

    def predict_proba(self, x):
        """Softmax over decision values; a ranking convenience, not a calibrated posterior."""
        return softmax(self.decision_values(x))


def svm_train(x, y, c=1.0, num_classes=NUM_CLASSES, max_iter=1000):
    """Fit one-vs-rest linear SVMs on rows of x with labels y.

    Needs at least two distinct classes. Standardization parameters are
    learned from x here; constant columns get unit scale.
    """
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y, dtype=np.int64)
    if x.ndim != 2 or y.shape != (x.shape[0],):
        raise ShapeMismatch(f"x {x.shape} vs y {y.shape}")
    if c <= 0:
        raise ValueError("c must be positive")
    present = np.unique(y)
    if present.size < 2:
        raise DegenerateLabels(f"need at least 2 classes, got {present.size}")
    if present.min() < 0 or present.max() >= num_classes:
        raise ShapeMismatch(f"labels must lie in [0, {num_classes})")

    n, d = x.shape
    mean = x.mean(axis=0)
    scale = x.std(axis=0)
    scale[scale == 0.0] = 1.0
    z = (x - mean) / scale

    lam = 1.0 / (c * n)
    w = np.zeros((num_classes, d))
    b = np.zeros(num_classes)
    signs = np.where(y[None, :] == np.arange(num_classes)[:, None], 1.0, -1.0)  # (C, n)
    for t in range(1, max_iter + 1):
        eta = 1.0 / (lam * t)
        margins = signs * (w @ z.T + b[:, None])      # (C, n)
        viol = (margins < 1.0) * signs                # subgradient mask with sign
        w -= eta * (lam * w - (viol @ z) / n)
        b += eta * viol.sum(axis=1) / n
    return SvmModel(weights=w, biases=b, feature_mean=mean, feature_scale=scale, c=float(c))

"""Training loop with early stopping, plus feature standardization and the
per-utterance feature cache shared by the CLI and the experiment grid."""

from __future__ import annotations

import hashlib
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import FeatureMissing, ShapeMismatch
from .metrics import EvalReport, compute_metrics
from .models import Model, forward_logits
from .nn import TrainConfig, make_optimizer
from .nn.ops import softmax_cross_entropy


@dataclass
class Standardizer:
    """Per-column z-scoring fit on training data only.

    Works on the trailing axis, so it applies unchanged to flat vectors
    (n, d) and to frame matrices (n, t, d).
    """

    mean: np.ndarray
    scale: np.ndarray

    @classmethod
    def fit(cls, x):
        x = np.asarray(x, dtype=np.float64)
        flat = x.reshape(-1, x.shape[-1])
        mean = flat.mean(axis=0)
        scale = flat.std(axis=0)
        scale = np.where(scale == 0.0, 1.0, scale)
        return cls(mean=mean, scale=scale)

    def transform(self, x):
        x = np.asarray(x, dtype=np.float64)
        if x.shape[-1] != self.mean.shape[0]:
            raise ShapeMismatch(f"expected {self.mean.shape[0]} columns, got {x.shape[-1]}")
        return (x - self.mean) / self.scale

    def state_tensors(self):
        return {"standardizer.mean": self.mean, "standardizer.scale": self.scale}

    @classmethod
    def from_state(cls, tensors):
        return cls(mean=tensors.pop("standardizer.mean"),
                   scale=tensors.pop("standardizer.scale"))


# -- feature cache -------------------------------------------------------------


def clip_cache_name(clip_path, frame_ms):
    """Stable per-clip cache filename: stem plus a short path digest."""
    p = Path(clip_path)
    digest = hashlib.sha256(str(p.resolve()).encode("utf-8")).hexdigest()[:8]
    return f"{p.stem}-{digest}.{frame_ms}ms.npy"


def feature_path(features_dir, clip_path, frame_ms):
    return Path(features_dir) / clip_cache_name(clip_path, frame_ms)


def load_cached_llds(features_dir, manifest, frame_ms):
    """Stack cached (frames, n_llds) matrices for every manifest entry."""
    mats = []
    for entry in manifest.entries:
        path = feature_path(features_dir, entry.path, frame_ms)
        if not path.exists():
            raise FeatureMissing(
                f"no cached features for {entry.path} at {frame_ms} ms; run extract first")
        mats.append(np.load(path))
    return np.stack(mats)


# -- training loop -------------------------------------------------------------


@dataclass
class TrainResult:
    model: Model
    history: list = field(default_factory=list)
    best_epoch: int = -1
    best_val_ua: float = float("nan")
    best_state: dict = field(default_factory=dict)


def _eval_batches(model, x, batch_size):
    preds = []
    for start in range(0, len(x), batch_size):
        logits = forward_logits(model, x[start:start + batch_size])
        preds.append(logits.argmax(axis=1))
    return np.concatenate(preds)


def evaluate_model(model: Model, x, y, batch_size=64, run_metadata=None) -> EvalReport:
    """Eval-mode predictions scored against y."""
    predicted = _eval_batches(model, np.asarray(x, dtype=np.float64), batch_size)
    return compute_metrics(np.asarray(y, dtype=np.int64), predicted,
                           num_classes=model.spec.num_classes,
                           run_metadata=run_metadata)


def train_model(model: Model, x_train, y_train, x_val, y_val,
                config: TrainConfig) -> TrainResult:
    """Mini-batch training with early stopping on validation UA.

    Shuffling and dropout draw from one generator seeded by config.seed,
    so identical inputs give bit-identical trajectories. The model is left
    holding the weights of the best validation epoch.
    """
    x_train = np.asarray(x_train, dtype=np.float64)
    y_train = np.asarray(y_train, dtype=np.int64)
    x_val = np.asarray(x_val, dtype=np.float64)
    y_val = np.asarray(y_val, dtype=np.int64)
    if len(x_train) != len(y_train):
        raise ShapeMismatch(f"{len(x_train)} examples vs {len(y_train)} labels")

    result = TrainResult(model=model, best_state=model.net.state_dict())
    if config.max_epochs == 0:
        return result

    rng = np.random.default_rng(config.seed)
    optimizer = make_optimizer(config.optimizer, config.learning_rate)
    net = model.net
    bad_epochs = 0
    for epoch in range(config.max_epochs):
        order = rng.permutation(len(x_train))
        net.set_mode("train")
        losses = []
        for start in range(0, len(order), config.batch_size):
            idx = order[start:start + config.batch_size]
            net.zero_grads()
            logits = net.forward(x_train[idx], rng)
            loss, dlogits = softmax_cross_entropy(logits, y_train[idx])
            net.backward(dlogits)
            optimizer.step(net.named_params())
            losses.append(loss * len(idx))

        train_report = evaluate_model(model, x_train, y_train, config.batch_size)
        val_report = evaluate_model(model, x_val, y_val, config.batch_size)
        result.history.append({
            "epoch": epoch,
            "train_loss": float(np.sum(losses) / len(order)),
            "train_wa": train_report.wa,
            "val_ua": val_report.ua,
            "val_wa": val_report.wa,
        })
        if result.best_epoch < 0 or val_report.ua > result.best_val_ua:
            result.best_epoch = epoch
            result.best_val_ua = val_report.ua
            result.best_state = net.state_dict()
            bad_epochs = 0
        else:
            bad_epochs += 1
            if bad_epochs >= config.early_stop_patience:
                break
    net.load_state_dict(result.best_state)
    return result

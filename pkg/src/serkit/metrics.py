"""Evaluation metrics: confusion matrix, unweighted and weighted accuracy.

UA is macro recall averaged over the classes that actually occur in the
truth labels; classes absent from the truth are excluded from the mean
and listed separately. WA is plain accuracy.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .errors import LabelOutOfRange, LengthMismatch

NUM_CLASSES = 5


@dataclass
class EvalReport:
    confusion: np.ndarray                       # (C, C) counts, rows = truth
    ua: float                                   # percent
    wa: float                                   # percent
    per_class_recall: list                      # percent or None when absent
    absent_classes: list
    run_metadata: dict = field(default_factory=dict)

    @property
    def num_evaluated(self):
        return int(self.confusion.sum())

    def to_dict(self):
        return {
            "confusion": self.confusion.tolist(),
            "ua": self.ua,
            "wa": self.wa,
            "per_class_recall": self.per_class_recall,
            "absent_classes": self.absent_classes,
            "run_metadata": self.run_metadata,
        }

    def to_json(self, indent=2):
        return json.dumps(self.to_dict(), indent=indent, sort_keys=True)

    @classmethod
    def from_dict(cls, data):
        return cls(
            confusion=np.asarray(data["confusion"], dtype=np.int64),
            ua=data["ua"],
            wa=data["wa"],
            per_class_recall=list(data["per_class_recall"]),
            absent_classes=list(data["absent_classes"]),
            run_metadata=dict(data.get("run_metadata", {})),
        )


def confusion_matrix(truth, predicted, num_classes=NUM_CLASSES):
    truth = np.asarray(truth, dtype=np.int64)
    predicted = np.asarray(predicted, dtype=np.int64)
    if truth.shape != predicted.shape or truth.ndim != 1:
        raise LengthMismatch(f"truth {truth.shape} vs predicted {predicted.shape}")
    if truth.size == 0:
        raise LengthMismatch("need at least one labelled example")
    both = np.concatenate([truth, predicted])
    if both.min() < 0 or both.max() >= num_classes:
        raise LabelOutOfRange(f"labels must lie in [0, {num_classes})")
    counts = np.zeros((num_classes, num_classes), dtype=np.int64)
    np.add.at(counts, (truth, predicted), 1)
    return counts


def compute_metrics(truth, predicted, num_classes=NUM_CLASSES,
                    run_metadata: Optional[dict] = None) -> EvalReport:
    """Score predictions against truth labels in [0, num_classes)."""
    counts = confusion_matrix(truth, predicted, num_classes)
    totals = counts.sum(axis=1)
    correct = np.diag(counts)
    recalls, absent = [], []
    for k in range(num_classes):
        if totals[k] == 0:
            recalls.append(None)
            absent.append(k)
        else:
            recalls.append(100.0 * correct[k] / totals[k])
    present = [r for r in recalls if r is not None]
    ua = float(np.mean(present))
    wa = 100.0 * correct.sum() / totals.sum()
    return EvalReport(confusion=counts, ua=ua, wa=float(wa),
                      per_class_recall=recalls, absent_classes=absent,
                      run_metadata=run_metadata or {})

"""Evaluation metrics and per-run metric records."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

__all__ = [
    "accuracy",
    "confusion_matrix",
    "matthews_corrcoef",
    "aggregate",
    "EpochMetrics",
    "RunMetrics",
]


def accuracy(predictions: np.ndarray, labels: np.ndarray) -> float:
    predictions = np.asarray(predictions)
    labels = np.asarray(labels)
    if predictions.shape != labels.shape:
        raise ValueError(f"shape mismatch: {predictions.shape} vs {labels.shape}")
    if predictions.size == 0:
        return 0.0
    return float(np.mean(predictions == labels))


def confusion_matrix(predictions: np.ndarray, labels: np.ndarray, n_classes: int) -> np.ndarray:
    """Counts[c_true, c_pred] over the pair of label vectors."""
    cm = np.zeros((n_classes, n_classes), dtype=np.int64)
    np.add.at(cm, (np.asarray(labels), np.asarray(predictions)), 1)
    return cm


def matthews_corrcoef(predictions: np.ndarray, labels: np.ndarray, n_classes: int) -> float:
    """Multiclass Matthews correlation from the confusion matrix.

    Uses the R_k form: (c*s - t.p) / sqrt((s^2 - p.p)(s^2 - t.t)) with
    c = trace, s = total count, t/p = per-class true/predicted counts.
    A zero denominator (all predictions or all labels in one class) is
    defined as 0.
    """
    cm = confusion_matrix(predictions, labels, n_classes).astype(np.float64)
    t = cm.sum(axis=1)  # true counts per class
    p = cm.sum(axis=0)  # predicted counts per class
    c = np.trace(cm)
    s = cm.sum()
    cov_tp = c * s - t @ p
    cov_pp = s * s - p @ p
    cov_tt = s * s - t @ t
    denom = np.sqrt(cov_pp * cov_tt)
    if denom == 0.0:
        return 0.0
    return float(cov_tp / denom)


def aggregate(values) -> tuple[float, float, int]:
    """(mean, sample stdev, n); stdev is 0 for fewer than two values."""
    arr = np.asarray(list(values), dtype=np.float64)
    n = arr.size
    if n == 0:
        raise ValueError("cannot aggregate an empty sequence")
    mean = float(arr.mean())
    stdev = float(arr.std(ddof=1)) if n > 1 else 0.0
    return mean, stdev, n


@dataclass
class EpochMetrics:
    """Summary of one training epoch; None marks fields a strategy lacks."""

    epoch: int
    total_loss: float
    ce_loss: float
    kd_loss: float | None
    train_accuracy: float
    dev_accuracy: float | None
    dev_mcc: float | None
    disagreement_count: int | None


@dataclass
class RunMetrics:
    """Full history of one training run plus best-epoch dev selection."""

    epochs: list[EpochMetrics] = field(default_factory=list)
    best_epoch: int | None = None
    best_dev_accuracy: float | None = None
    best_dev_mcc: float | None = None
    teacher_hash_before: str | None = None
    teacher_hash_after: str | None = None

    def finalize(self) -> None:
        """Pick the epoch with the highest dev accuracy (earliest on ties)."""
        scored = [e for e in self.epochs if e.dev_accuracy is not None]
        if not scored:
            return
        best = max(scored, key=lambda e: (e.dev_accuracy, -e.epoch))
        self.best_epoch = best.epoch
        self.best_dev_accuracy = best.dev_accuracy
        self.best_dev_mcc = best.dev_mcc

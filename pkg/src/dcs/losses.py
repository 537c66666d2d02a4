"""Objective terms for distillation-guided fine-tuning.

The training objective is a convex blend of two terms,

    total = alpha * ce + (1 - alpha) * kd,

where ``ce`` is the usual mean cross-entropy against hard labels and ``kd``
is the soft-label term: per sample, the cross-entropy between the teacher's
temperature-softened class distribution p and the student's q,

    kd_i = -sum_c p_c(x_i) * log q_c(x_i),

averaged over the batch. Note kd_i equals KL(p || q) plus the teacher
entropy H(p); the entropy is constant in the student, so gradients match
the KL form and kd_i >= H(p) with equality iff q == p.

The corrective variant multiplies each sample's kd term by a weight w_i
(1 on teacher-student concordant samples, lambda > 1 on discordant ones)
before averaging. Weights touch only the soft-label term; the hard-label
cross-entropy is never reweighted, and weights are not renormalized across
the batch, so the weighted loss is monotone in lambda.

Teacher logits are treated as constants throughout: no gradient ever
reaches the teacher.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import ConfigurationError, DataError, DimensionError
from .tensor import Tensor, log_softmax, take_per_row

__all__ = [
    "LossBreakdown",
    "SampleWeightVector",
    "cross_entropy",
    "kd_loss",
    "weighted_kd_loss",
    "total_loss",
]


@dataclass
class LossBreakdown:
    """Scalar components of one objective evaluation."""

    total: float
    ce: float
    kd: float
    alpha: float
    per_sample_kd: np.ndarray = field(default_factory=lambda: np.zeros(0))


@dataclass
class SampleWeightVector:
    """Per-sample weights for the full training set, indexed by sample id."""

    weights: np.ndarray
    epoch_assigned: int

    def __post_init__(self):
        self.weights = np.asarray(self.weights, dtype=np.float64)
        if self.weights.ndim != 1:
            raise ConfigurationError(
                f"weights must be a flat vector, got shape {self.weights.shape}"
            )
        if np.any(self.weights < 1.0):
            raise ConfigurationError("sample weights must all be >= 1")

    def __len__(self) -> int:
        return len(self.weights)

    def for_batch(self, sample_ids: np.ndarray) -> np.ndarray:
        return self.weights[np.asarray(sample_ids)]


def cross_entropy(student_logits: Tensor, labels: np.ndarray) -> Tensor:
    """Mean negative log-likelihood of the hard labels under the student."""
    if student_logits.ndim != 2:
        raise DimensionError(
            f"cross_entropy expects [batch, classes] logits, got {student_logits.shape}"
        )
    labels = np.asarray(labels)
    n_classes = student_logits.shape[1]
    bad = np.flatnonzero((labels < 0) | (labels >= n_classes))
    if bad.size:
        i = int(bad[0])
        raise DataError(
            f"label {int(labels[i])} out of range [0, {n_classes}) at batch position {i}"
        )
    logq = log_softmax(student_logits, 1.0)
    return -take_per_row(logq, labels).mean()


def _teacher_probs(teacher_logits, n_classes: int, temperature: float) -> np.ndarray:
    """Softened teacher distribution as a constant (detached) array."""
    t = np.asarray(
        teacher_logits.data if isinstance(teacher_logits, Tensor) else teacher_logits,
        dtype=np.float64,
    )
    if t.ndim != 2 or t.shape[1] != n_classes:
        raise DimensionError(
            f"teacher logits shape {t.shape} does not match student shape (*, {n_classes})"
        )
    z = t / temperature
    z = z - z.max(axis=1, keepdims=True)
    e = np.exp(z)
    return e / e.sum(axis=1, keepdims=True)


def kd_loss(
    teacher_logits, student_logits: Tensor, temperature: float = 1.0
) -> tuple[Tensor, np.ndarray]:
    """Soft-label loss: batch mean of -sum_c p_c log q_c.

    Returns the differentiable scalar and the detached per-sample values.
    Gradient flows to the student logits only.
    """
    scalar, per_sample = _kd_terms(teacher_logits, student_logits, None, temperature)
    return scalar, per_sample


def weighted_kd_loss(
    teacher_logits,
    student_logits: Tensor,
    weights: np.ndarray,
    temperature: float = 1.0,
) -> tuple[Tensor, np.ndarray]:
    """Soft-label loss with per-sample weights: batch mean of w_i * kd_i.

    With all weights 1 this is exactly :func:`kd_loss`. Returns the scalar
    and the detached *unweighted* per-sample values.
    """
    w = np.asarray(weights, dtype=np.float64)
    if w.shape != (student_logits.shape[0],):
        raise ConfigurationError(
            f"need one weight per batch sample: {w.shape} vs batch {student_logits.shape[0]}"
        )
    if np.any(w < 1.0):
        raise ConfigurationError("per-sample weights must all be >= 1")
    return _kd_terms(teacher_logits, student_logits, w, temperature)


def _kd_terms(teacher_logits, student_logits, weights, temperature):
    if student_logits.ndim != 2:
        raise DimensionError(
            f"kd loss expects [batch, classes] logits, got {student_logits.shape}"
        )
    if student_logits.shape[0] == 0:
        raise DimensionError("kd loss needs a nonempty batch")
    p = _teacher_probs(teacher_logits, student_logits.shape[1], temperature)
    logq = log_softmax(student_logits, temperature)
    per_sample = -(Tensor(p) * logq).sum(axis=1)  # [batch]
    values = per_sample.data.copy()
    if weights is not None:
        per_sample = per_sample * Tensor(weights)
    return per_sample.mean(), values


def total_loss(
    ce: Tensor, kd: Tensor, alpha: float, per_sample_kd: np.ndarray | None = None
) -> tuple[Tensor, LossBreakdown]:
    """Convex blend ``alpha * ce + (1 - alpha) * kd`` plus a value breakdown.

    alpha=1 returns a total bitwise equal to ce; alpha=0, bitwise equal
    to kd.
    """
    if not 0.0 <= alpha <= 1.0:
        raise ConfigurationError(f"alpha must lie in [0, 1], got {alpha}")
    total = ce * alpha + kd * (1.0 - alpha)
    breakdown = LossBreakdown(
        total=total.item(),
        ce=ce.item(),
        kd=kd.item(),
        alpha=float(alpha),
        per_sample_kd=np.zeros(0) if per_sample_kd is None else np.asarray(per_sample_kd),
    )
    return total, breakdown

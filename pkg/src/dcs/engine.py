"""Epoch loop for dynamically re-weighted self-distillation.

One run fine-tunes a student under a frozen teacher of the same
architecture. Epoch 0 is a warm-up trained with the unweighted soft-label
loss. At the start of every later epoch the full training set is scored in
evaluation mode, each sample is marked concordant or discordant (teacher
argmax vs student argmax), and a fresh weight vector is assigned before the
epoch trains on it:

    epoch 0:   weights all 1
    epoch e>0: score agreement against the student as of the end of epoch
               e-1, assign weights by strategy, then train the epoch

Strategies differ only in where the lambda weights land: on discordant
samples (the corrective default), on concordant ones (reverse), on a random
subset of the same size as the discordant set (random, budget-matched), or
nowhere (plain distillation). Vanilla fine-tuning ignores the teacher
entirely.

Weight vectors are indexed by stable sample id, so batch shuffling never
misaligns them. A non-finite loss aborts the run rather than being clamped,
since silent recovery would mask a bad alpha/lambda configuration.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field

import numpy as np

from .datasets import LabeledDataset
from .errors import ConfigurationError, NumericalAbort
from .losses import SampleWeightVector, cross_entropy, total_loss, weighted_kd_loss
from .metrics import EpochMetrics, RunMetrics, accuracy, matthews_corrcoef
from .models import ClassifierModel, parameter_hash
from .optim import make_optimizer
from .tensor import GradTape, backward

__all__ = [
    "WeightingStrategy",
    "AgreementMap",
    "DcsRunState",
    "compute_agreement",
    "assign_weights",
    "train_epoch",
    "run_dcs",
]

# rng stream tags: keep shuffling and weight randomness independent, so
# strategies that draw no random weights share the exact shuffle sequence
_STREAM_SHUFFLE = 13
_STREAM_WEIGHTS = 14


class WeightingStrategy(enum.Enum):
    DCS = "dcs"
    DCS_REVERSE = "dcs-reverse"
    DCS_RANDOM = "dcs-random"
    NO_WEIGHTING = "no-weighting"
    PURE_KD = "kd"
    VANILLA_FT = "vanilla"

    @property
    def uses_teacher(self) -> bool:
        return self is not WeightingStrategy.VANILLA_FT

    @property
    def uses_lambda(self) -> bool:
        return self in (
            WeightingStrategy.DCS,
            WeightingStrategy.DCS_REVERSE,
            WeightingStrategy.DCS_RANDOM,
        )

    @classmethod
    def parse(cls, name: str) -> "WeightingStrategy":
        try:
            return cls(name)
        except ValueError:
            valid = ", ".join(s.value for s in cls)
            raise ConfigurationError(
                f"unknown strategy {name!r}; expected one of: {valid}"
            ) from None


@dataclass
class AgreementMap:
    """Per-sample teacher/student predictions and their agreement."""

    agree: np.ndarray
    teacher_pred: np.ndarray
    student_pred: np.ndarray
    epoch: int

    def __len__(self) -> int:
        return len(self.agree)

    @property
    def disagreement_count(self) -> int:
        return int(np.sum(~self.agree))


def compute_agreement(
    teacher: ClassifierModel,
    student: ClassifierModel,
    dataset: LabeledDataset,
    epoch: int = 0,
) -> AgreementMap:
    """Evaluation-mode predictions of both models over the full dataset."""
    if teacher.descriptor.n_classes != student.descriptor.n_classes:
        raise ConfigurationError(
            f"teacher and student disagree on n_classes: "
            f"{teacher.descriptor.n_classes} vs {student.descriptor.n_classes}"
        )
    t_pred = teacher.predict(dataset.features)
    s_pred = student.predict(dataset.features)
    return AgreementMap(
        agree=t_pred == s_pred, teacher_pred=t_pred, student_pred=s_pred, epoch=epoch
    )


def assign_weights(
    agreement: AgreementMap,
    strategy: WeightingStrategy,
    lam: float,
    rng: np.random.Generator | None = None,
) -> SampleWeightVector:
    """Turn an agreement map into the epoch's weight vector.

    dcs puts lambda on discordant samples, dcs-reverse on concordant ones,
    and dcs-random on a uniformly random subset of the same size as the
    discordant set. The remaining strategies pin every weight to 1.
    """
    n = len(agreement)
    weights = np.ones(n)
    if strategy.uses_lambda:
        if not lam > 1.0:
            raise ConfigurationError(
                f"lambda must be > 1 for strategy {strategy.value!r}, got {lam}"
            )
        if strategy is WeightingStrategy.DCS:
            weights[~agreement.agree] = lam
        elif strategy is WeightingStrategy.DCS_REVERSE:
            weights[agreement.agree] = lam
        else:  # DCS_RANDOM: same lambda budget as dcs, placed uniformly
            if rng is None:
                raise ConfigurationError("dcs-random needs an rng")
            budget = agreement.disagreement_count
            weights[rng.choice(n, size=budget, replace=False)] = lam
    return SampleWeightVector(weights=weights, epoch_assigned=agreement.epoch)


@dataclass
class DcsRunState:
    """Mutable state of one run; owned by a single thread."""

    student: ClassifierModel
    teacher: ClassifierModel | None
    weights: SampleWeightVector
    epoch: int
    optimizer: object
    rng_shuffle: np.random.Generator
    rng_weights: np.random.Generator
    history: RunMetrics = field(default_factory=RunMetrics)
    weight_history: list[SampleWeightVector] = field(default_factory=list)


def _evaluate(model: ClassifierModel, dataset: LabeledDataset) -> tuple[float, float]:
    pred = model.predict(dataset.features)
    return (
        accuracy(pred, dataset.labels),
        matthews_corrcoef(pred, dataset.labels, dataset.n_classes),
    )


def train_epoch(
    state: DcsRunState,
    train: LabeledDataset,
    config,
    dev: LabeledDataset | None = None,
    disagreement_count: int | None = None,
) -> EpochMetrics:
    """One shuffled pass over the training set with the current weights."""
    strategy = WeightingStrategy.parse(config.strategy)
    n = len(train)
    order = state.rng_shuffle.permutation(n)
    loss_sum = ce_sum = kd_sum = 0.0
    correct = 0
    for start in range(0, n, config.batch_size):
        idx = order[start : start + config.batch_size]
        x = train.features[idx]
        y = train.labels[idx]
        with GradTape():
            logits = state.student.forward(x)
            ce = cross_entropy(logits, y)
            if strategy.uses_teacher:
                t_logits = state.teacher.forward(x)
                kd, _ = weighted_kd_loss(
                    t_logits.data, logits, state.weights.for_batch(idx), config.temperature
                )
                loss, breakdown = total_loss(ce, kd, config.alpha)
            else:
                loss = ce
                breakdown = None
            value = loss.item()
            if not np.isfinite(value):
                parts = (
                    f"ce={breakdown.ce}, kd={breakdown.kd}" if breakdown else f"ce={value}"
                )
                raise NumericalAbort(
                    f"non-finite loss at epoch {state.epoch}, batch {start // config.batch_size}: "
                    f"total={value}, {parts}"
                )
            state.optimizer.zero_grad()
            backward(loss)
            state.optimizer.step()
        loss_sum += value * len(idx)
        ce_sum += ce.item() * len(idx)
        if breakdown is not None:
            kd_sum += breakdown.kd * len(idx)
        correct += int(np.sum(np.argmax(logits.data, axis=1) == y))
    dev_acc = dev_mcc = None
    if dev is not None and len(dev):
        dev_acc, dev_mcc = _evaluate(state.student, dev)
    return EpochMetrics(
        epoch=state.epoch,
        total_loss=loss_sum / n,
        ce_loss=ce_sum / n,
        kd_loss=(kd_sum / n) if strategy.uses_teacher else None,
        train_accuracy=correct / n,
        dev_accuracy=dev_acc,
        dev_mcc=dev_mcc,
        disagreement_count=disagreement_count,
    )


def run_dcs(
    teacher: ClassifierModel | None,
    student: ClassifierModel,
    train: LabeledDataset,
    dev: LabeledDataset | None,
    config,
    seed: int,
) -> tuple[ClassifierModel, RunMetrics, list[SampleWeightVector]]:
    """Full training run: warm-up epoch, then re-weight-and-train epochs.

    The teacher is frozen for the duration (verified by parameter digest).
    Returns the trained student, its metric history, and the per-epoch
    weight vectors for auditing.
    """
    strategy = WeightingStrategy.parse(config.strategy)
    if strategy.uses_teacher:
        if teacher is None:
            raise ConfigurationError(
                f"strategy {strategy.value!r} needs a teacher; train one first"
            )
        if teacher.descriptor != student.descriptor:
            raise ConfigurationError(
                "self-distillation needs identical teacher/student architectures: "
                f"{teacher.descriptor} vs {student.descriptor}"
            )
        teacher.set_trainable(False)
    if strategy.uses_lambda and not config.lam > 1.0:
        raise ConfigurationError(f"lambda must be > 1, got {config.lam}")

    state = DcsRunState(
        student=student,
        teacher=teacher,
        weights=SampleWeightVector(np.ones(len(train)), epoch_assigned=0),
        epoch=0,
        optimizer=make_optimizer(config.optimizer, student.parameters(), config.learning_rate),
        rng_shuffle=np.random.default_rng((seed, _STREAM_SHUFFLE)),
        rng_weights=np.random.default_rng((seed, _STREAM_WEIGHTS)),
    )
    if strategy.uses_teacher:
        state.history.teacher_hash_before = parameter_hash(teacher)

    for epoch in range(config.epochs):
        state.epoch = epoch
        disagreement = None
        if epoch == 0:
            # warm-up: the re-weighting mechanism stays off for the first
            # epoch so the student adapts to the task before being steered
            state.weights = SampleWeightVector(np.ones(len(train)), epoch_assigned=0)
        elif strategy.uses_teacher:
            agreement = compute_agreement(teacher, state.student, train, epoch)
            state.weights = assign_weights(agreement, strategy, config.lam, state.rng_weights)
            disagreement = agreement.disagreement_count
        state.weight_history.append(state.weights)
        metrics = train_epoch(state, train, config, dev, disagreement)
        state.history.epochs.append(metrics)

    state.history.finalize()
    if strategy.uses_teacher:
        state.history.teacher_hash_after = parameter_hash(teacher)
        if state.history.teacher_hash_after != state.history.teacher_hash_before:
            raise NumericalAbort("teacher parameters changed during a run; teacher must stay frozen")
    return state.student, state.history, state.weight_history

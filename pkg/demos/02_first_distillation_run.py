"""Train a student under a frozen teacher on a noisy synthetic task.

The teacher is fine-tuned for just two epochs (underfit on purpose), then
the student trains with the blended objective while per-sample weights are
re-assigned at each epoch boundary: samples where teacher and student
currently disagree get weight lambda, everything else weight 1. The first
epoch is a warm-up with flat weights.

Run with:  python demos/02_first_distillation_run.py
"""

import numpy as np

from dcs import (
    ArchitectureDescriptor,
    DistillationConfig,
    TaskSpec,
    build_model,
    load_task,
    parameter_hash,
    run_dcs,
)

# 200 training samples with 20% of their labels flipped; the dev split is
# never noised, so it measures real generalization.
task = TaskSpec(
    kind="gaussian_mixture",
    n_train=200,
    n_dev=1000,
    n_classes=4,
    input_dim=10,
    label_noise_rate=0.2,
    class_separation=3.0,
    seed=100,
)
arch = ArchitectureDescriptor(kind="mlp", n_classes=4, input_dim=10, hidden_dims=(64,))
config = DistillationConfig(
    task=task, arch=arch, strategy="dcs", alpha=0.4, lam=2.0,
    epochs=15, batch_size=16, learning_rate=0.02, seeds=(0,),
)

train, dev = load_task(task)

# teacher: vanilla fine-tuning, two epochs, then frozen
teacher = build_model(arch, seed=0)
teacher_cfg = config.replace(strategy="vanilla", alpha=1.0, epochs=config.teacher_epochs)
teacher, teacher_hist, _ = run_dcs(None, teacher, train, dev, teacher_cfg, seed=0)
print(f"teacher dev accuracy after {config.teacher_epochs} epochs: "
      f"{teacher_hist.best_dev_accuracy:.4f}")
frozen_digest = parameter_hash(teacher)

# student: same architecture, fresh init, corrective distillation
student = build_model(arch, seed=1)
student, history, weight_history = run_dcs(teacher, student, train, dev, config, seed=1)

print(f"\n{'epoch':>5} {'total':>8} {'ce':>8} {'kd':>8} {'train':>7} {'dev':>7} {'disagree':>8} {'#lambda':>8}")
for epoch, weights in zip(history.epochs, weight_history):
    boosted = int(np.sum(weights.weights > 1.0))
    print(
        f"{epoch.epoch:>5} {epoch.total_loss:>8.4f} {epoch.ce_loss:>8.4f} "
        f"{epoch.kd_loss:>8.4f} {epoch.train_accuracy:>7.3f} {epoch.dev_accuracy:>7.3f} "
        f"{'-' if epoch.disagreement_count is None else epoch.disagreement_count:>8} "
        f"{boosted:>8}"
    )

print(f"\nbest epoch {history.best_epoch}: dev accuracy {history.best_dev_accuracy:.4f}, "
      f"dev MCC {history.best_dev_mcc:.4f}")
assert parameter_hash(teacher) == frozen_digest, "teacher must stay frozen"
print("teacher parameter digest unchanged across the run")

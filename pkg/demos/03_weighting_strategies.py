"""Compare weight-placement strategies under one config and seed set.

Five strategies run against the same frozen teacher:

  vanilla      cross-entropy only, no teacher
  kd           distillation with flat weights
  dcs          lambda on teacher-student discordant samples
  dcs-random   lambda on a random subset of the same size (budget-matched)
  dcs-reverse  lambda on concordant samples instead

The interesting comparison is dcs vs dcs-random vs dcs-reverse: all three
spend the same weighting budget, only the placement differs.

Run with:  python demos/03_weighting_strategies.py
"""

from dcs import ArchitectureDescriptor, DistillationConfig, TaskSpec, compare_strategies

task = TaskSpec(
    kind="gaussian_mixture", n_train=200, n_dev=1000, n_classes=4,
    input_dim=10, label_noise_rate=0.2, class_separation=3.0, seed=100,
)
arch = ArchitectureDescriptor(kind="mlp", n_classes=4, input_dim=10, hidden_dims=(64,))
config = DistillationConfig(
    task=task, arch=arch, strategy="dcs", alpha=0.4, lam=2.0,
    epochs=40, batch_size=16, learning_rate=0.02, seeds=tuple(range(5)),
)

results = compare_strategies(config, out_dir="runs/demo-compare")

print(f"{'strategy':<12} {'dev accuracy':>16} {'dev MCC':>16}")
for r in results:
    print(
        f"{r.strategy:<12} {r.dev_accuracy_mean:>8.4f} +/- {r.dev_accuracy_stdev:.4f} "
        f"{r.dev_mcc_mean:>8.4f} +/- {r.dev_mcc_stdev:.4f}"
    )
print("\nfull tables and per-sample weight audits under runs/demo-compare/")

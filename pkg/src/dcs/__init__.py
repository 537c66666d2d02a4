"""Dynamic corrective self-distillation for desk-scale classifiers.

Fine-tunes a student under a frozen same-architecture teacher, boosting the
per-sample weight of the soft-label loss wherever teacher and student
currently disagree. Ships its own float64 tensor/autodiff core, a small
model zoo, synthetic and text tasks, and an experiment harness with a CLI.
"""

from .checkpoint import load_checkpoint, save_checkpoint
from .config import DEFAULT_ALPHA_GRID, DEFAULT_LAMBDA_GRID, DistillationConfig, dump_config, load_config
from .datasets import (
    LabeledDataset,
    TaskSpec,
    fnv1a64,
    generate_synthetic,
    load_task,
    load_text_sequences,
    load_text_task,
    make_transfer_pair,
    subsample,
)
from .engine import (
    AgreementMap,
    DcsRunState,
    WeightingStrategy,
    assign_weights,
    compute_agreement,
    run_dcs,
    train_epoch,
)
from .errors import (
    ConfigurationError,
    DataError,
    DcsError,
    DimensionError,
    NumericalAbort,
    PersistenceError,
)
from .harness import (
    ExperimentResult,
    compare_strategies,
    report,
    run_experiment,
    sweep,
    train_teacher,
)
from .losses import (
    LossBreakdown,
    SampleWeightVector,
    cross_entropy,
    kd_loss,
    total_loss,
    weighted_kd_loss,
)
from .metrics import EpochMetrics, RunMetrics, accuracy, aggregate, matthews_corrcoef
from .models import (
    ArchitectureDescriptor,
    ClassifierModel,
    build_model,
    clone_parameters,
    parameter_hash,
)
from .optim import Adam, Sgd, make_optimizer
from .tensor import (
    GradTape,
    Tensor,
    backward,
    bmm,
    concat,
    embedding,
    layer_norm,
    log_softmax,
    matmul,
    relu,
    softmax,
    take_per_row,
    transpose,
)

__version__ = "0.1.0"

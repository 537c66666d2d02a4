"""Experiment front-end: teacher training, runs, comparisons, sweeps, reports.

Directory layout for one experiment:

    <out>/config.json            canonical config used
    <out>/teacher.json           teacher checkpoint (when trained here)
    <out>/metrics.csv            per-epoch rows, all seeds
    <out>/summary.csv            one aggregate row over seeds
    <out>/seed<k>/student.json   trained student per seed
    <out>/seed<k>/weights_epoch<N>.csv   per-sample weight audit trail

``compare_strategies`` nests one such experiment per strategy and adds
``comparison.csv``; the sweep runners nest one per grid point and add
``sweep_alpha.csv`` / ``sweep_lambda.csv``.

Multi-seed and sweep runs are independent of each other; with
``n_workers > 1`` they execute on a thread pool and results merge in seed
order, so the artifacts do not depend on completion order.
"""

from __future__ import annotations

import csv
import hashlib
import json
import numpy as np
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

from .checkpoint import load_checkpoint, save_checkpoint
from .config import (
    DEFAULT_ALPHA_GRID,
    DEFAULT_LAMBDA_GRID,
    DistillationConfig,
    dump_config,
)
from .datasets import load_task
from .engine import WeightingStrategy, run_dcs
from .errors import ConfigurationError
from .losses import SampleWeightVector
from .metrics import RunMetrics, aggregate
from .models import ClassifierModel, build_model

__all__ = [
    "ExperimentResult",
    "train_teacher",
    "run_experiment",
    "compare_strategies",
    "sweep",
    "report",
    "METRICS_COLUMNS",
    "SUMMARY_COLUMNS",
    "SWEEP_COLUMNS",
    "WEIGHTS_COLUMNS",
    "CSV_SCHEMA_VERSION",
]

# Column sets are frozen per schema version; bump the version to change them.
CSV_SCHEMA_VERSION = 1
METRICS_COLUMNS = (
    "strategy", "seed", "epoch", "total_loss", "ce_loss", "kd_loss",
    "train_accuracy", "dev_accuracy", "dev_mcc", "disagreement_count",
)
SUMMARY_COLUMNS = (
    "strategy", "alpha", "lambda", "n_seeds",
    "dev_accuracy_mean", "dev_accuracy_stdev", "dev_mcc_mean", "dev_mcc_stdev",
)
SWEEP_COLUMNS = ("param_value", "mean", "stdev", "n_seeds")
WEIGHTS_COLUMNS = ("sample_id", "weight")

COMPARE_ORDER = ("vanilla", "kd", "dcs", "dcs-random", "dcs-reverse")


def _cell(value) -> str:
    if value is None:
        return ""
    if isinstance(value, float):  # builtin repr round-trips float64 exactly
        return repr(float(value))
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    return str(value)


def _write_csv(path: Path, columns, rows) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(columns)
        for row in rows:
            writer.writerow([_cell(v) for v in row])


def task_id(config: DistillationConfig) -> str:
    """Short stable digest identifying the task a checkpoint was trained on."""
    blob = json.dumps(config.task.to_dict(), sort_keys=True).encode()
    return hashlib.sha256(blob).hexdigest()[:16]


@dataclass
class ExperimentResult:
    """Per-seed histories plus their aggregate for one (config, strategy)."""

    strategy: str
    seeds: tuple[int, ...]
    runs: list[RunMetrics]
    dev_accuracy_mean: float
    dev_accuracy_stdev: float
    dev_mcc_mean: float
    dev_mcc_stdev: float
    out_dir: Path | None = None
    weight_audits: dict[int, list[SampleWeightVector]] = field(default_factory=dict)


def train_teacher(config: DistillationConfig, out_dir) -> tuple[Path, RunMetrics]:
    """Vanilla fine-tuning for ``teacher_epochs``; writes the checkpoint.

    The teacher seed is the first entry of ``config.seeds``, so one config
    pins one teacher.
    """
    out_dir = Path(out_dir)
    train, dev = load_task(config.task)
    seed = config.seeds[0]
    teacher = build_model(config.arch, seed)
    teacher_config = config.replace(
        strategy="vanilla", alpha=1.0, epochs=config.teacher_epochs
    )
    teacher, history, _ = run_dcs(None, teacher, train, dev, teacher_config, seed)
    path = save_checkpoint(
        teacher,
        out_dir / "teacher.json",
        metadata={"epochs": config.teacher_epochs, "seed": seed, "task_id": task_id(config)},
    )
    return path, history


def _load_teacher(config: DistillationConfig, teacher_path) -> ClassifierModel:
    teacher_path = Path(teacher_path)
    if not teacher_path.exists():
        raise ConfigurationError(
            f"no teacher checkpoint at {teacher_path}; run train-teacher first"
        )
    teacher, _ = load_checkpoint(teacher_path)
    if teacher.descriptor != config.arch:
        raise ConfigurationError(
            f"teacher at {teacher_path} was built for {teacher.descriptor}, "
            f"but the config asks for {config.arch}"
        )
    return teacher


def _resolve_teacher(config, strategy, out_dir, teacher_path):
    if not strategy.uses_teacher:
        return None
    if teacher_path is not None:
        return _load_teacher(config, teacher_path)
    if out_dir is None:
        return _train_teacher_in_memory(config)
    default = Path(out_dir) / "teacher.json"
    if default.exists():
        return _load_teacher(config, default)
    path, _ = train_teacher(config, out_dir)
    return _load_teacher(config, path)


def _one_seed(config, strategy, teacher, train, dev, seed):
    run_config = config.replace(strategy=strategy.value)
    student = build_model(config.arch, seed)
    return run_dcs(teacher, student, train, dev, run_config, seed)


def metrics_rows(strategy: str, seed: int, history: RunMetrics):
    for e in history.epochs:
        yield (
            strategy, seed, e.epoch, e.total_loss, e.ce_loss, e.kd_loss,
            e.train_accuracy, e.dev_accuracy, e.dev_mcc, e.disagreement_count,
        )


def run_experiment(
    config: DistillationConfig,
    strategy: str | None = None,
    out_dir=None,
    teacher_path=None,
    seeds=None,
) -> ExperimentResult:
    """Train one student per seed and aggregate best-epoch dev metrics.

    Loads the teacher from ``teacher_path`` when given, else from
    ``<out>/teacher.json``, else trains one. Writing is skipped entirely
    when ``out_dir`` is None.
    """
    strategy = WeightingStrategy.parse(strategy or config.strategy)
    seeds = tuple(seeds) if seeds is not None else config.seeds
    config = config.replace(strategy=strategy.value, seeds=list(seeds))
    out = Path(out_dir) if out_dir is not None else None
    train, dev = load_task(config.task)
    if out is not None:
        out.mkdir(parents=True, exist_ok=True)
        (out / "config.json").write_text(dump_config(config), encoding="utf-8")
    teacher = _resolve_teacher(config, strategy, out, teacher_path)

    if config.n_workers > 1 and len(seeds) > 1:
        with ThreadPoolExecutor(max_workers=config.n_workers) as pool:
            futures = [
                pool.submit(_one_seed, config, strategy, teacher, train, dev, s)
                for s in seeds
            ]
            outcomes = [f.result() for f in futures]  # future order == seed order
    else:
        outcomes = [_one_seed(config, strategy, teacher, train, dev, s) for s in seeds]

    runs = [history for _, history, _ in outcomes]
    audits = {seed: weights for seed, (_, _, weights) in zip(seeds, outcomes)}
    acc_mean, acc_stdev, n = aggregate(
        [h.best_dev_accuracy for h in runs if h.best_dev_accuracy is not None] or [0.0]
    )
    mcc_mean, mcc_stdev, _ = aggregate(
        [h.best_dev_mcc for h in runs if h.best_dev_mcc is not None] or [0.0]
    )
    result = ExperimentResult(
        strategy=strategy.value,
        seeds=seeds,
        runs=runs,
        dev_accuracy_mean=acc_mean,
        dev_accuracy_stdev=acc_stdev,
        dev_mcc_mean=mcc_mean,
        dev_mcc_stdev=mcc_stdev,
        out_dir=out,
        weight_audits=audits,
    )
    if out is not None:
        _write_experiment(out, config, strategy, seeds, outcomes, result)
    return result


def _train_teacher_in_memory(config):
    train, dev = load_task(config.task)
    seed = config.seeds[0]
    teacher = build_model(config.arch, seed)
    teacher_config = config.replace(strategy="vanilla", alpha=1.0, epochs=config.teacher_epochs)
    teacher, _, _ = run_dcs(None, teacher, train, dev, teacher_config, seed)
    return teacher


def _write_experiment(out, config, strategy, seeds, outcomes, result):
    rows = []
    for seed, (student, history, weight_history) in zip(seeds, outcomes):
        rows.extend(metrics_rows(strategy.value, seed, history))
        seed_dir = out / f"seed{seed}"
        save_checkpoint(
            student,
            seed_dir / "student.json",
            metadata={
                "epochs": config.epochs,
                "seed": seed,
                "task_id": task_id(config),
                "strategy": strategy.value,
            },
        )
        if strategy.uses_teacher:
            for epoch, wv in enumerate(weight_history):
                _write_csv(
                    seed_dir / f"weights_epoch{epoch}.csv",
                    WEIGHTS_COLUMNS,
                    ((i, w) for i, w in enumerate(wv.weights)),
                )
    _write_csv(out / "metrics.csv", METRICS_COLUMNS, rows)
    _write_csv(out / "summary.csv", SUMMARY_COLUMNS, [_summary_row(config, result)])


def _summary_row(config, result):
    return (
        result.strategy, config.alpha, config.lam, len(result.seeds),
        result.dev_accuracy_mean, result.dev_accuracy_stdev,
        result.dev_mcc_mean, result.dev_mcc_stdev,
    )


def compare_strategies(config: DistillationConfig, out_dir=None) -> list[ExperimentResult]:
    """Run every weighting strategy under one config and seed set.

    All strategies share one teacher checkpoint. Emits ``comparison.csv``
    with one row per strategy when ``out_dir`` is given.
    """
    out = Path(out_dir) if out_dir is not None else None
    teacher_path = None
    if out is not None:
        out.mkdir(parents=True, exist_ok=True)
        teacher_path, _ = train_teacher(config, out)
    results = []
    for name in COMPARE_ORDER:
        strategy = WeightingStrategy.parse(name)
        sub = out / name if out is not None else None
        results.append(
            run_experiment(
                config,
                strategy=name,
                out_dir=sub,
                teacher_path=teacher_path if strategy.uses_teacher else None,
            )
        )
    if out is not None:
        _write_csv(
            out / "comparison.csv",
            SUMMARY_COLUMNS,
            [_summary_row(config, r) for r in results],
        )
    return results


def sweep(
    config: DistillationConfig, param: str, grid=None, out_dir=None
) -> list[tuple[float, float, float, int]]:
    """One aggregated dev-accuracy row per grid point of alpha or lambda.

    Returns (param_value, mean, stdev, n_seeds) tuples and writes
    ``sweep_<param>.csv`` when ``out_dir`` is given.
    """
    if param not in ("alpha", "lambda"):
        raise ConfigurationError(f"sweep param must be 'alpha' or 'lambda', got {param!r}")
    if grid is None:
        grid = DEFAULT_ALPHA_GRID if param == "alpha" else DEFAULT_LAMBDA_GRID
    grid = [float(v) for v in grid]
    if not grid:
        raise ConfigurationError("sweep grid is empty")
    out = Path(out_dir) if out_dir is not None else None
    teacher_path = None
    if out is not None:
        out.mkdir(parents=True, exist_ok=True)
        teacher_path, _ = train_teacher(config, out)
    rows = []
    for value in grid:
        point = config.replace(**({"alpha": value} if param == "alpha" else {"lam": value}))
        sub = out / f"{param}_{value:g}" if out is not None else None
        result = run_experiment(point, out_dir=sub, teacher_path=teacher_path)
        rows.append((value, result.dev_accuracy_mean, result.dev_accuracy_stdev, len(result.seeds)))
    if out is not None:
        _write_csv(out / f"sweep_{param}.csv", SWEEP_COLUMNS, rows)
    return rows


def _read_csv(path: Path) -> tuple[list[str], list[list[str]]]:
    with open(path, "r", encoding="utf-8", newline="") as fh:
        reader = csv.reader(fh)
        rows = list(reader)
    return rows[0], rows[1:]


def _format_table(header, rows) -> str:
    widths = [
        max(len(str(h)), *(len(str(r[i])) for r in rows)) if rows else len(str(h))
        for i, h in enumerate(header)
    ]
    def fmt(row):
        return "  ".join(str(v).ljust(w) for v, w in zip(row, widths)).rstrip()
    lines = [fmt(header), fmt(["-" * w for w in widths])]
    lines.extend(fmt(r) for r in rows)
    return "\n".join(lines)


def report(run_dir) -> str:
    """Human-readable summary of every results CSV under a run directory.

    Also rewrites sweep curves as whitespace-separated ``.dat`` files that
    gnuplot can consume directly.
    """
    run_dir = Path(run_dir)
    if not run_dir.is_dir():
        raise ConfigurationError(f"{run_dir} is not a directory")
    sections = []
    for name in ("comparison.csv", "summary.csv", "sweep_alpha.csv", "sweep_lambda.csv"):
        for path in sorted(run_dir.rglob(name)):
            header, rows = _read_csv(path)
            rel = path.relative_to(run_dir)
            sections.append(f"== {rel} ==\n{_format_table(header, rows)}")
            if name.startswith("sweep_") and rows:
                dat = path.with_suffix(".dat")
                with open(dat, "w", encoding="utf-8") as fh:
                    fh.write("# " + " ".join(header) + "\n")
                    for row in rows:
                        fh.write(" ".join(row) + "\n")
    if not sections:
        sections.append(f"no results CSVs found under {run_dir}")
    return "\n\n".join(sections) + "\n"

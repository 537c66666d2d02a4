"""Command-line front-end.

    dcs train-teacher --config cfg.json [--out DIR]
    dcs run           --config cfg.json --strategy dcs [--seeds 1,2,3] [--out DIR] [--teacher PATH]
    dcs compare       --config cfg.json [--out DIR]
    dcs sweep         --config cfg.json --param alpha --grid 0.1,0.3,0.5 [--out DIR]
    dcs report        --run-dir DIR

Exit codes: 0 success, 2 configuration error, 3 data error, 4 numerical
abort.
"""

from __future__ import annotations

import argparse
import sys

from . import harness
from .config import load_config
from .errors import ConfigurationError, DataError, DcsError, NumericalAbort

EXIT_CONFIG = 2
EXIT_DATA = 3
EXIT_NUMERIC = 4

STRATEGY_CHOICES = ("dcs", "dcs-reverse", "dcs-random", "kd", "vanilla")


def _parse_seeds(text: str) -> list[int]:
    try:
        return [int(s) for s in text.split(",") if s.strip()]
    except ValueError as exc:
        raise ConfigurationError(f"--seeds must be comma-separated integers: {text!r}") from exc


def _parse_grid(text: str) -> list[float]:
    try:
        return [float(s) for s in text.split(",") if s.strip()]
    except ValueError as exc:
        raise ConfigurationError(f"--grid must be comma-separated numbers: {text!r}") from exc


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="dcs",
        description="Self-distillation fine-tuning experiments with dynamic sample re-weighting.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("train-teacher", help="vanilla fine-tune a teacher and save its checkpoint")
    p.add_argument("--config", required=True)
    p.add_argument("--out", default="runs/teacher")

    p = sub.add_parser("run", help="train students under one strategy across seeds")
    p.add_argument("--config", required=True)
    p.add_argument("--strategy", required=True, choices=STRATEGY_CHOICES)
    p.add_argument("--seeds", default=None, help="comma-separated override of the config seeds")
    p.add_argument("--out", default="runs/run")
    p.add_argument("--teacher", default=None, help="path to an existing teacher checkpoint")

    p = sub.add_parser("compare", help="run every weighting strategy under one config")
    p.add_argument("--config", required=True)
    p.add_argument("--out", default="runs/compare")

    p = sub.add_parser("sweep", help="sweep alpha or lambda over a grid")
    p.add_argument("--config", required=True)
    p.add_argument("--param", required=True, choices=("alpha", "lambda"))
    p.add_argument("--grid", default=None, help="comma-separated grid values")
    p.add_argument("--out", default="runs/sweep")

    p = sub.add_parser("report", help="summarize the CSVs under a run directory")
    p.add_argument("--run-dir", required=True)
    return parser


def _dispatch(args) -> None:
    if args.command == "train-teacher":
        config = load_config(args.config)
        path, history = harness.train_teacher(config, args.out)
        best = history.best_dev_accuracy
        print(f"teacher checkpoint written to {path}")
        if best is not None:
            print(f"teacher dev accuracy (best epoch): {best:.4f}")
    elif args.command == "run":
        config = load_config(args.config)
        seeds = _parse_seeds(args.seeds) if args.seeds else None
        result = harness.run_experiment(
            config,
            strategy=args.strategy,
            out_dir=args.out,
            teacher_path=args.teacher,
            seeds=seeds,
        )
        print(
            f"{result.strategy}: dev accuracy "
            f"{result.dev_accuracy_mean:.4f} +/- {result.dev_accuracy_stdev:.4f} "
            f"over {len(result.seeds)} seed(s); results in {result.out_dir}"
        )
    elif args.command == "compare":
        config = load_config(args.config)
        results = harness.compare_strategies(config, args.out)
        for r in results:
            print(
                f"{r.strategy:12s} dev accuracy "
                f"{r.dev_accuracy_mean:.4f} +/- {r.dev_accuracy_stdev:.4f}"
            )
        print(f"comparison table written under {args.out}")
    elif args.command == "sweep":
        config = load_config(args.config)
        grid = _parse_grid(args.grid) if args.grid else None
        rows = harness.sweep(config, args.param, grid, args.out)
        for value, mean, stdev, n in rows:
            print(f"{args.param}={value:g}: {mean:.4f} +/- {stdev:.4f} (n={n})")
        print(f"curve written under {args.out}")
    else:  # report
        print(harness.report(args.run_dir), end="")


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        _dispatch(args)
    except ConfigurationError as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except DataError as exc:
        print(f"data error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except NumericalAbort as exc:
        print(f"numerical abort: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except DcsError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())

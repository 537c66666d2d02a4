"""Run configuration: one JSON-serializable recipe per experiment.

A run is reproducible from (config, seed) alone. JSON keys mirror the
dataclass field names, except the weight multiplier, which serializes as
"lambda" (a reserved word in Python, held as ``lam`` on the dataclass).
Unknown keys are rejected at every level so typos fail loudly.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

from .datasets import TaskSpec
from .engine import WeightingStrategy
from .errors import ConfigurationError
from .models import ArchitectureDescriptor

__all__ = [
    "DistillationConfig",
    "DEFAULT_ALPHA_GRID",
    "DEFAULT_LAMBDA_GRID",
    "load_config",
    "dump_config",
]

# default sweep grids
DEFAULT_ALPHA_GRID = (0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9)
DEFAULT_LAMBDA_GRID = (2.0, 3.0, 4.0, 5.0, 6.0)


@dataclass
class DistillationConfig:
    """Everything a run needs: task, architecture, objective, schedule."""

    task: TaskSpec
    arch: ArchitectureDescriptor
    strategy: str = "dcs"
    alpha: float = 0.5
    lam: float = 2.0
    temperature: float = 1.0
    epochs: int = 10
    teacher_epochs: int = 2
    batch_size: int = 16
    learning_rate: float = 0.01
    optimizer: str = "adam"
    seeds: tuple[int, ...] = (0, 1, 2)
    n_workers: int = 1

    def __post_init__(self):
        object.__setattr__(self, "seeds", tuple(int(s) for s in self.seeds))
        WeightingStrategy.parse(self.strategy)
        if not 0.0 <= self.alpha <= 1.0:
            raise ConfigurationError(f"alpha must lie in [0, 1], got {self.alpha}")
        if WeightingStrategy.parse(self.strategy).uses_lambda and not self.lam > 1.0:
            raise ConfigurationError(
                f"lambda must be > 1 for strategy {self.strategy!r}, got {self.lam}"
            )
        if not self.temperature > 0:
            raise ConfigurationError(f"temperature must be positive, got {self.temperature}")
        for name in ("epochs", "teacher_epochs", "batch_size", "n_workers"):
            if getattr(self, name) < 1:
                raise ConfigurationError(f"{name} must be >= 1, got {getattr(self, name)}")
        if not self.learning_rate > 0:
            raise ConfigurationError(
                f"learning_rate must be positive, got {self.learning_rate}"
            )
        if self.optimizer not in ("adam", "sgd"):
            raise ConfigurationError(
                f"optimizer must be 'adam' or 'sgd', got {self.optimizer!r}"
            )
        if not self.seeds:
            raise ConfigurationError("seeds must be a nonempty list")
        if len(set(self.seeds)) != len(self.seeds):
            raise ConfigurationError(f"seeds contain duplicates: {self.seeds}")

    def replace(self, **changes) -> "DistillationConfig":
        d = self.to_dict()
        for key, value in changes.items():
            json_key = "lambda" if key == "lam" else key
            if json_key not in d and key not in ("task", "arch"):
                raise ConfigurationError(f"unknown config field {key!r}")
            d[json_key] = value
        if "task" in changes:
            d["task"] = changes["task"].to_dict()
        if "arch" in changes:
            d["arch"] = changes["arch"].to_dict()
        return DistillationConfig.from_dict(d)

    def to_dict(self) -> dict:
        return {
            "task": self.task.to_dict(),
            "arch": self.arch.to_dict(),
            "strategy": self.strategy,
            "alpha": self.alpha,
            "lambda": self.lam,
            "temperature": self.temperature,
            "epochs": self.epochs,
            "teacher_epochs": self.teacher_epochs,
            "batch_size": self.batch_size,
            "learning_rate": self.learning_rate,
            "optimizer": self.optimizer,
            "seeds": list(self.seeds),
            "n_workers": self.n_workers,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "DistillationConfig":
        if not isinstance(d, dict):
            raise ConfigurationError(f"config must be a JSON object, got {type(d).__name__}")
        allowed = {
            "task", "arch", "strategy", "alpha", "lambda", "temperature",
            "epochs", "teacher_epochs", "batch_size", "learning_rate",
            "optimizer", "seeds", "n_workers",
        }
        unknown = set(d) - allowed
        if unknown:
            raise ConfigurationError(f"unknown config keys: {sorted(unknown)}")
        for key in ("task", "arch"):
            if key not in d:
                raise ConfigurationError(f"config is missing the {key!r} section")
        kwargs = {k: v for k, v in d.items() if k not in ("task", "arch", "lambda")}
        if "lambda" in d:
            kwargs["lam"] = d["lambda"]
        return cls(
            task=TaskSpec.from_dict(d["task"]),
            arch=ArchitectureDescriptor.from_dict(d["arch"]),
            **kwargs,
        )


def dump_config(config: DistillationConfig) -> str:
    """Canonical JSON text; serialize -> parse -> serialize is a fixed point."""
    return json.dumps(config.to_dict(), indent=2, sort_keys=True) + "\n"


def load_config(path) -> DistillationConfig:
    try:
        with open(path, "r", encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        raise ConfigurationError(f"cannot read config {path}: {exc}") from exc
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigurationError(f"{path} is not valid JSON: {exc.msg}") from exc
    return DistillationConfig.from_dict(data)

"""Versioned JSON checkpoints for classifier models.

Parameters serialize as base-10 float literals; Python's float repr is
shortest-round-trip, so save -> load -> predict is bitwise identical to the
in-memory model.
"""

from __future__ import annotations

import json
from pathlib import Path

import numpy as np

from .errors import PersistenceError
from .models import ArchitectureDescriptor, ClassifierModel
from .tensor import Tensor

__all__ = ["save_checkpoint", "load_checkpoint", "CHECKPOINT_FORMAT_VERSION"]

CHECKPOINT_FORMAT_VERSION = 1


def save_checkpoint(model: ClassifierModel, path, metadata: dict | None = None) -> Path:
    """Write a model plus training metadata; returns the path written."""
    path = Path(path)
    doc = {
        "format_version": CHECKPOINT_FORMAT_VERSION,
        "architecture": model.descriptor.to_dict(),
        "parameters": [
            {
                "name": name,
                "shape": list(p.data.shape),
                "data": p.data.reshape(-1).tolist(),
            }
            for name, p in model.params.items()
        ],
        "metadata": metadata or {},
    }
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        with open(path, "w", encoding="utf-8") as fh:
            json.dump(doc, fh)
    except OSError as exc:
        raise PersistenceError(f"cannot write checkpoint {path}: {exc}") from exc
    return path


def load_checkpoint(path) -> tuple[ClassifierModel, dict]:
    """Read a checkpoint back into a trainable model; returns (model, metadata)."""
    path = Path(path)
    try:
        with open(path, "r", encoding="utf-8") as fh:
            doc = json.load(fh)
    except OSError as exc:
        raise PersistenceError(f"cannot read checkpoint {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise PersistenceError(f"checkpoint {path} is not valid JSON: {exc.msg}") from exc
    version = doc.get("format_version")
    if version != CHECKPOINT_FORMAT_VERSION:
        raise PersistenceError(
            f"checkpoint {path} has format_version {version}; "
            f"this build reads version {CHECKPOINT_FORMAT_VERSION}"
        )
    descriptor = ArchitectureDescriptor.from_dict(doc["architecture"])
    expected = {name: shape for name, shape, _ in descriptor.parameter_plan()}
    params = {}
    for entry in doc["parameters"]:
        name, shape = entry["name"], tuple(entry["shape"])
        if name not in expected or expected[name] != shape:
            raise PersistenceError(
                f"checkpoint {path}: parameter {name!r} with shape {shape} does not "
                "match the architecture descriptor"
            )
        data = np.asarray(entry["data"], dtype=np.float64).reshape(shape)
        params[name] = Tensor(data, requires_grad=True)
    missing = set(expected) - set(params)
    if missing:
        raise PersistenceError(f"checkpoint {path} is missing parameters: {sorted(missing)}")
    return ClassifierModel(descriptor, params), doc.get("metadata", {})

"""Desk-scale task generation and ingestion.

Synthetic generators emulate the low-resource fine-tuning regime: a small,
noisily labeled training split against a clean dev split. Text tasks load
from JSONL files (one object per line with "text" and "label" keys, plus an
optional "split" of "train" or "dev") and are featurized by hashed
bag-of-words counts with a fixed FNV-1a 64-bit hash, so feature vectors are
identical across platforms and runs.

Every generator and loader is a pure function of (spec or file, seed).
Train labels may be noise-flipped; dev labels never are.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field, fields

import numpy as np

from .errors import ConfigurationError, DataError

__all__ = [
    "TaskSpec",
    "LabeledDataset",
    "generate_synthetic",
    "load_task",
    "load_text_task",
    "load_text_sequences",
    "subsample",
    "make_transfer_pair",
    "fnv1a64",
]

GENERATOR_KINDS = ("gaussian_mixture", "xor_blobs", "text_file")

# FNV-1a, 64-bit: fixed so hashed features never depend on the platform.
_FNV_OFFSET = 14695981039346656037
_FNV_PRIME = 1099511628211
_U64 = 2**64


def fnv1a64(token: str) -> int:
    h = _FNV_OFFSET
    for byte in token.encode("utf-8"):
        h = ((h ^ byte) * _FNV_PRIME) % _U64
    return h


@dataclass(frozen=True)
class TaskSpec:
    """Deterministic recipe for one classification task.

    ``class_separation`` is the minimum distance between class means in
    units of the within-class standard deviation (gaussian_mixture), or the
    blob-grid spacing (xor_blobs). ``path``/``hash_dim`` apply only to
    text_file tasks.
    """

    kind: str = "gaussian_mixture"
    n_train: int = 200
    n_dev: int = 200
    n_classes: int = 2
    input_dim: int = 2
    label_noise_rate: float = 0.0
    class_separation: float = 4.0
    seed: int = 0
    path: str | None = None
    hash_dim: int | None = None

    def __post_init__(self):
        if self.kind not in GENERATOR_KINDS:
            raise ConfigurationError(
                f"unknown task kind {self.kind!r}; expected one of {GENERATOR_KINDS}"
            )
        if self.kind != "text_file":
            if self.n_classes < 2:
                raise ConfigurationError(f"n_classes must be >= 2, got {self.n_classes}")
            if self.n_train < 2 * self.n_classes:
                raise ConfigurationError(
                    f"n_train must be >= 2 * n_classes, got {self.n_train}"
                )
            if self.n_dev < 0:
                raise ConfigurationError(f"n_dev must be >= 0, got {self.n_dev}")
            if not 0.0 <= self.label_noise_rate < 0.5:
                raise ConfigurationError(
                    f"label_noise_rate must lie in [0, 0.5), got {self.label_noise_rate}"
                )
            if self.input_dim < 1:
                raise ConfigurationError(f"input_dim must be positive, got {self.input_dim}")
            if self.class_separation <= 0:
                raise ConfigurationError(
                    f"class_separation must be positive, got {self.class_separation}"
                )
            if self.kind == "xor_blobs" and self.n_classes != 2:
                raise ConfigurationError("xor_blobs is a two-class task")
            if self.kind == "xor_blobs" and self.input_dim < 2:
                raise ConfigurationError("xor_blobs needs input_dim >= 2")
        else:
            if not self.path:
                raise ConfigurationError("text_file tasks need a path")
            if not self.hash_dim or self.hash_dim < 1:
                raise ConfigurationError(f"hash_dim must be positive, got {self.hash_dim}")

    def to_dict(self) -> dict:
        d = {"kind": self.kind, "seed": self.seed}
        if self.kind == "text_file":
            d["path"] = self.path
            d["hash_dim"] = self.hash_dim
        else:
            d.update(
                n_train=self.n_train,
                n_dev=self.n_dev,
                n_classes=self.n_classes,
                input_dim=self.input_dim,
                label_noise_rate=self.label_noise_rate,
                class_separation=self.class_separation,
            )
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "TaskSpec":
        allowed = {f.name for f in fields(cls)}
        unknown = set(d) - allowed
        if unknown:
            raise ConfigurationError(f"unknown task keys: {sorted(unknown)}")
        return cls(**d)


@dataclass
class LabeledDataset:
    """Ordered samples with stable ids: features row i belongs to sample id i."""

    features: np.ndarray
    labels: np.ndarray
    n_classes: int
    split: str = "train"
    origin_ids: np.ndarray | None = None

    def __post_init__(self):
        self.labels = np.asarray(self.labels, dtype=np.int64)
        if self.split not in ("train", "dev"):
            raise ConfigurationError(f"split must be 'train' or 'dev', got {self.split!r}")
        if len(self.features) != len(self.labels):
            raise DataError(
                f"feature/label count mismatch: {len(self.features)} vs {len(self.labels)}"
            )
        if self.labels.size and (self.labels.min() < 0 or self.labels.max() >= self.n_classes):
            raise DataError(
                f"labels must lie in [0, {self.n_classes}), got range "
                f"[{self.labels.min()}, {self.labels.max()}]"
            )

    def __len__(self) -> int:
        return len(self.labels)

    @property
    def sample_ids(self) -> np.ndarray:
        return np.arange(len(self.labels))


def _class_means(spec: TaskSpec) -> np.ndarray:
    """Seeded class means scaled to a minimum pairwise distance of
    ``class_separation`` (unit within-class noise)."""
    rng = np.random.default_rng((spec.seed, 0))
    if spec.kind == "xor_blobs":
        # four blob centers live on a grid; labels come from quadrant parity
        half = spec.class_separation / 2.0
        centers = np.zeros((4, spec.input_dim))
        centers[:, 0] = [half, -half, half, -half]
        centers[:, 1] = [half, half, -half, -half]
        return centers
    means = rng.standard_normal((spec.n_classes, spec.input_dim))
    dists = [
        np.linalg.norm(means[i] - means[j])
        for i in range(spec.n_classes)
        for j in range(i + 1, spec.n_classes)
    ]
    return means * (spec.class_separation / min(dists))


def _draw_split(spec: TaskSpec, n: int, rng: np.random.Generator, split: str) -> LabeledDataset:
    if spec.kind == "xor_blobs":
        centers = _class_means(spec)
        quadrant = rng.permutation(np.arange(n) % 4)
        # diagonal blobs share a class: label = sign(x) XOR sign(y)
        labels = np.array([0, 1, 1, 0])[quadrant]
        features = centers[quadrant] + rng.standard_normal((n, spec.input_dim))
    else:
        means = _class_means(spec)
        labels = rng.permutation(np.arange(n) % spec.n_classes)
        features = means[labels] + rng.standard_normal((n, spec.input_dim))
    return LabeledDataset(features, labels, spec.n_classes, split=split)


def _apply_label_noise(ds: LabeledDataset, rate: float, rng: np.random.Generator) -> None:
    """Flip each label to a uniformly random other class with prob ``rate``."""
    if rate == 0.0:
        return
    flips = rng.random(len(ds)) < rate
    offsets = rng.integers(1, ds.n_classes, size=int(flips.sum()))
    ds.labels[flips] = (ds.labels[flips] + offsets) % ds.n_classes


def generate_synthetic(spec: TaskSpec) -> tuple[LabeledDataset, LabeledDataset]:
    """Build (train, dev) for a synthetic spec; noise touches train only."""
    if spec.kind == "text_file":
        raise ConfigurationError("text_file tasks load via load_text_task, not a generator")
    train = _draw_split(spec, spec.n_train, np.random.default_rng((spec.seed, 1)), "train")
    dev = _draw_split(spec, spec.n_dev, np.random.default_rng((spec.seed, 2)), "dev")
    _apply_label_noise(train, spec.label_noise_rate, np.random.default_rng((spec.seed, 3)))
    return train, dev


def load_task(spec: TaskSpec) -> tuple[LabeledDataset, LabeledDataset]:
    """Dispatch a TaskSpec to its generator or loader."""
    if spec.kind == "text_file":
        return load_text_task(spec.path, spec.hash_dim)
    return generate_synthetic(spec)


def _read_jsonl(path) -> list[tuple[int, dict]]:
    try:
        with open(path, "r", encoding="utf-8") as fh:
            raw = fh.readlines()
    except OSError as exc:
        raise DataError(f"cannot read text task file {path}: {exc}") from exc
    records = []
    for lineno, line in enumerate(raw, start=1):
        if not line.strip():
            continue
        try:
            obj = json.loads(line)
        except json.JSONDecodeError as exc:
            raise DataError(f"{path}:{lineno}: invalid JSON ({exc.msg})") from exc
        if not isinstance(obj, dict):
            raise DataError(f"{path}:{lineno}: expected a JSON object")
        for key in ("text", "label"):
            if not isinstance(obj.get(key), str):
                raise DataError(f"{path}:{lineno}: missing or non-string {key!r}")
        if obj.get("split", "train") not in ("train", "dev"):
            raise DataError(f"{path}:{lineno}: split must be 'train' or 'dev'")
        records.append((lineno, obj))
    return records


def _label_index(records, path, n_classes):
    names = sorted({obj["label"] for _, obj in records})
    if n_classes is not None and len(names) > n_classes:
        raise DataError(
            f"{path}: found {len(names)} labels {names} but n_classes={n_classes}"
        )
    return {name: i for i, name in enumerate(names)}


def load_text_task(
    path, hash_dim: int, n_classes: int | None = None
) -> tuple[LabeledDataset, LabeledDataset]:
    """Hashed bag-of-words count vectors from a JSONL file.

    Tokens are lowercased whitespace splits; each token increments the count
    at fnv1a64(token) mod hash_dim. Label strings map to indices in sorted
    order. Lines route to the train or dev split via their "split" key.
    """
    if hash_dim < 1:
        raise ConfigurationError(f"hash_dim must be positive, got {hash_dim}")
    records = _read_jsonl(path)
    if not records:
        raise DataError(f"{path}: no records")
    label_of = _label_index(records, path, n_classes)
    k = n_classes if n_classes is not None else len(label_of)
    per_split = {"train": ([], []), "dev": ([], [])}
    for _, obj in records:
        vec = np.zeros(hash_dim)
        for token in obj["text"].lower().split():
            vec[fnv1a64(token) % hash_dim] += 1.0
        feats, labs = per_split[obj.get("split", "train")]
        feats.append(vec)
        labs.append(label_of[obj["label"]])
    out = []
    for split in ("train", "dev"):
        feats, labs = per_split[split]
        features = np.asarray(feats) if feats else np.zeros((0, hash_dim))
        out.append(LabeledDataset(features, np.asarray(labs, dtype=np.int64), k, split=split))
    return out[0], out[1]


def load_text_sequences(
    path, vocab_size: int, seq_len: int, n_classes: int | None = None
) -> tuple[LabeledDataset, LabeledDataset]:
    """Token-id sequences for the transformer: fnv1a64(token) mod (vocab-1) + 1,
    truncated or zero-padded to seq_len (0 is the pad id)."""
    if vocab_size < 2:
        raise ConfigurationError(f"vocab_size must be >= 2, got {vocab_size}")
    if seq_len < 1:
        raise ConfigurationError(f"seq_len must be positive, got {seq_len}")
    records = _read_jsonl(path)
    if not records:
        raise DataError(f"{path}: no records")
    label_of = _label_index(records, path, n_classes)
    k = n_classes if n_classes is not None else len(label_of)
    per_split = {"train": ([], []), "dev": ([], [])}
    for _, obj in records:
        ids = [fnv1a64(t) % (vocab_size - 1) + 1 for t in obj["text"].lower().split()]
        ids = (ids + [0] * seq_len)[:seq_len]
        feats, labs = per_split[obj.get("split", "train")]
        feats.append(ids)
        labs.append(label_of[obj["label"]])
    out = []
    for split in ("train", "dev"):
        feats, labs = per_split[split]
        features = np.asarray(feats, dtype=np.int64) if feats else np.zeros((0, seq_len), dtype=np.int64)
        out.append(LabeledDataset(features, np.asarray(labs, dtype=np.int64), k, split=split))
    return out[0], out[1]


def subsample(dataset: LabeledDataset, k: int, seed: int) -> LabeledDataset:
    """Seeded uniform subsample without replacement, keeping every class.

    Picks one sample per present class first, then fills uniformly. Sample
    ids are renumbered contiguously; ``origin_ids`` maps new id -> old id.
    """
    n = len(dataset)
    if k > n:
        raise ConfigurationError(f"cannot subsample {k} from {n} samples")
    if k < dataset.n_classes:
        raise ConfigurationError(
            f"k={k} is below n_classes={dataset.n_classes}; every class must survive"
        )
    rng = np.random.default_rng(seed)
    chosen = []
    for c in np.unique(dataset.labels):
        chosen.append(rng.choice(np.flatnonzero(dataset.labels == c)))
    remaining = np.setdiff1d(np.arange(n), chosen)
    extra = rng.choice(remaining, size=k - len(chosen), replace=False)
    keep = np.sort(np.concatenate([np.asarray(chosen), extra])).astype(np.int64)
    return LabeledDataset(
        dataset.features[keep].copy(),
        dataset.labels[keep].copy(),
        dataset.n_classes,
        split=dataset.split,
        origin_ids=keep,
    )


def make_transfer_pair(
    spec: TaskSpec, target_n_train: int, shift: float = 0.5
) -> tuple[tuple[LabeledDataset, LabeledDataset], tuple[LabeledDataset, LabeledDataset]]:
    """A large source task and a small, distribution-shifted target task.

    Emulates the pretrain-then-fine-tune regime: pretrain on the source,
    fine-tune on the target, whose class means move by ``shift`` (in units
    of the class separation) along a seeded random direction.
    """
    if spec.kind != "gaussian_mixture":
        raise ConfigurationError("transfer pairs are defined for gaussian_mixture tasks")
    if target_n_train < 2 * spec.n_classes:
        raise ConfigurationError(
            f"target_n_train must be >= 2 * n_classes, got {target_n_train}"
        )
    source = generate_synthetic(spec)
    rng = np.random.default_rng((spec.seed, 4))
    direction = rng.standard_normal(spec.input_dim)
    direction *= shift * spec.class_separation / np.linalg.norm(direction)
    target_spec = TaskSpec(
        kind=spec.kind,
        n_train=target_n_train,
        n_dev=spec.n_dev,
        n_classes=spec.n_classes,
        input_dim=spec.input_dim,
        label_noise_rate=spec.label_noise_rate,
        class_separation=spec.class_separation,
        seed=spec.seed + 1,
    )
    target = generate_synthetic(target_spec)
    for ds in target:
        ds.features += direction
    return source, target

"""Classifier architectures used as both teacher and student.

Self-distillation needs teacher and student with identical architecture and
capacity, so every model here is fully determined by an
:class:`ArchitectureDescriptor` plus an init seed: same descriptor, same
parameter names and shapes; same (descriptor, seed), bitwise-same weights.

Three desk-scale architectures:

* ``linear``   — logistic-regression-style map from features to logits.
* ``mlp``      — fully connected net with relu hidden layers.
* ``tiny_transformer`` — one encoder block, single attention head, mean
  pooling over the sequence, for token-id inputs.
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass, field

import numpy as np

from .errors import ConfigurationError, DimensionError
from .tensor import (
    Tensor,
    bmm,
    embedding,
    layer_norm,
    matmul,
    relu,
    softmax,
    transpose,
)

__all__ = [
    "ArchitectureDescriptor",
    "ClassifierModel",
    "build_model",
    "clone_parameters",
    "parameter_hash",
]

ARCHITECTURES = ("linear", "mlp", "tiny_transformer")


@dataclass(frozen=True)
class ArchitectureDescriptor:
    """Everything needed to rebuild a model's parameter layout.

    ``input_dim`` applies to linear/mlp; ``vocab_size``/``seq_len``/
    ``embed_dim`` to the transformer (one block, one attention head,
    feed-forward width ``4 * embed_dim``).
    """

    kind: str
    n_classes: int
    input_dim: int | None = None
    hidden_dims: tuple[int, ...] = field(default_factory=tuple)
    vocab_size: int | None = None
    seq_len: int | None = None
    embed_dim: int | None = None

    def __post_init__(self):
        if self.kind not in ARCHITECTURES:
            raise ConfigurationError(
                f"unknown architecture {self.kind!r}; expected one of {ARCHITECTURES}"
            )
        if self.n_classes < 2:
            raise ConfigurationError(f"n_classes must be >= 2, got {self.n_classes}")
        object.__setattr__(self, "hidden_dims", tuple(self.hidden_dims))
        if self.kind in ("linear", "mlp"):
            if self.input_dim is None or self.input_dim < 1:
                raise ConfigurationError(
                    f"{self.kind} needs a positive input_dim, got {self.input_dim}"
                )
        if self.kind == "mlp" and any(h < 1 for h in self.hidden_dims):
            raise ConfigurationError(f"hidden_dims must be positive, got {self.hidden_dims}")
        if self.kind == "tiny_transformer":
            for name in ("vocab_size", "seq_len", "embed_dim"):
                v = getattr(self, name)
                if v is None or v < 1:
                    raise ConfigurationError(
                        f"tiny_transformer needs a positive {name}, got {v}"
                    )

    def to_dict(self) -> dict:
        d = {"kind": self.kind, "n_classes": self.n_classes}
        if self.kind in ("linear", "mlp"):
            d["input_dim"] = self.input_dim
        if self.kind == "mlp":
            d["hidden_dims"] = list(self.hidden_dims)
        if self.kind == "tiny_transformer":
            d["vocab_size"] = self.vocab_size
            d["seq_len"] = self.seq_len
            d["embed_dim"] = self.embed_dim
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "ArchitectureDescriptor":
        allowed = {
            "kind", "n_classes", "input_dim", "hidden_dims",
            "vocab_size", "seq_len", "embed_dim",
        }
        unknown = set(d) - allowed
        if unknown:
            raise ConfigurationError(f"unknown architecture keys: {sorted(unknown)}")
        d = dict(d)
        if "hidden_dims" in d:
            d["hidden_dims"] = tuple(d["hidden_dims"])
        return cls(**d)

    def parameter_plan(self) -> list[tuple[str, tuple[int, ...], int]]:
        """Ordered (name, shape, fan_in) triples; fan_in 0 marks constant init."""
        plan: list[tuple[str, tuple[int, ...], int]] = []
        if self.kind == "linear":
            plan.append(("w", (self.input_dim, self.n_classes), self.input_dim))
            plan.append(("b", (self.n_classes,), self.input_dim))
        elif self.kind == "mlp":
            dims = [self.input_dim, *self.hidden_dims, self.n_classes]
            for i in range(len(dims) - 1):
                plan.append((f"w{i}", (dims[i], dims[i + 1]), dims[i]))
                plan.append((f"b{i}", (dims[i + 1],), dims[i]))
        else:
            d = self.embed_dim
            ff = 4 * d
            plan.append(("tok_emb", (self.vocab_size, d), d))
            plan.append(("pos_emb", (self.seq_len, d), d))
            for name in ("wq", "wk", "wv", "wo"):
                plan.append((f"attn.{name}", (d, d), d))
            plan.append(("ln1.gain", (d,), 0))
            plan.append(("ln1.bias", (d,), 0))
            plan.append(("ff.w1", (d, ff), d))
            plan.append(("ff.b1", (ff,), d))
            plan.append(("ff.w2", (ff, d), ff))
            plan.append(("ff.b2", (d,), ff))
            plan.append(("ln2.gain", (d,), 0))
            plan.append(("ln2.bias", (d,), 0))
            plan.append(("head.w", (d, self.n_classes), d))
            plan.append(("head.b", (self.n_classes,), d))
        return plan

    def parameter_count(self) -> int:
        return sum(int(np.prod(shape)) for _, shape, _ in self.parameter_plan())


class ClassifierModel:
    """A parameterized map from a batch of inputs to class logits."""

    def __init__(self, descriptor: ArchitectureDescriptor, params: dict[str, Tensor]):
        self.descriptor = descriptor
        self.params = params

    @property
    def n_classes(self) -> int:
        return self.descriptor.n_classes

    def parameters(self) -> list[Tensor]:
        return list(self.params.values())

    def set_trainable(self, trainable: bool) -> None:
        for p in self.params.values():
            p.requires_grad = trainable

    def forward(self, batch) -> Tensor:
        """Batch of inputs -> logits tensor of shape [batch, n_classes].

        Records on the active tape only when parameters require gradients;
        with a frozen model (or no tape) this is a plain evaluation pass.
        """
        kind = self.descriptor.kind
        if kind == "tiny_transformer":
            return self._forward_transformer(batch)
        x = batch if isinstance(batch, Tensor) else Tensor(np.asarray(batch, dtype=np.float64))
        if x.ndim != 2 or x.shape[1] != self.descriptor.input_dim:
            raise DimensionError(
                f"expected batch of shape [n, {self.descriptor.input_dim}], got {x.shape}"
            )
        if kind == "linear":
            return matmul(x, self.params["w"]) + self.params["b"]
        h = x
        n_layers = len(self.descriptor.hidden_dims) + 1
        for i in range(n_layers):
            h = matmul(h, self.params[f"w{i}"]) + self.params[f"b{i}"]
            if i < n_layers - 1:
                h = relu(h)
        return h

    def _forward_transformer(self, batch) -> Tensor:
        if isinstance(batch, Tensor):
            ids = batch.data.astype(np.int64)
        else:
            ids = np.asarray(batch)
        if not np.issubdtype(ids.dtype, np.integer):
            raise DimensionError("tiny_transformer expects integer token ids")
        if ids.ndim != 2 or ids.shape[1] != self.descriptor.seq_len:
            raise DimensionError(
                f"expected token batch of shape [n, {self.descriptor.seq_len}], got {ids.shape}"
            )
        p = self.params
        d = self.descriptor.embed_dim
        x = embedding(p["tok_emb"], ids) + p["pos_emb"]  # [B, L, D]
        q = self._project(x, p["attn.wq"])
        k = self._project(x, p["attn.wk"])
        v = self._project(x, p["attn.wv"])
        scores = bmm(q, transpose(k)) * (1.0 / np.sqrt(d))
        ctx = bmm(softmax(scores), v)
        x = layer_norm(x + self._project(ctx, p["attn.wo"]), p["ln1.gain"], p["ln1.bias"])
        f = relu(self._project(x, p["ff.w1"]) + p["ff.b1"])
        f = self._project(f, p["ff.w2"]) + p["ff.b2"]
        x = layer_norm(x + f, p["ln2.gain"], p["ln2.bias"])
        pooled = x.mean(axis=1)  # [B, D]
        return matmul(pooled, p["head.w"]) + p["head.b"]

    @staticmethod
    def _project(x3: Tensor, w: Tensor) -> Tensor:
        """Apply a [d_in, d_out] map to the last axis of a rank-3 tensor."""
        b, l, d_in = x3.shape
        flat = x3.reshape(b * l, d_in)
        return matmul(flat, w).reshape(b, l, w.shape[1])

    def predict(self, batch) -> np.ndarray:
        """Argmax class per row; ties resolve to the lowest class index."""
        logits = self.forward(batch)
        return np.argmax(logits.data, axis=1)


def build_model(descriptor: ArchitectureDescriptor, seed: int) -> ClassifierModel:
    """Instantiate a model with uniform(-1/sqrt(fan_in), +1/sqrt(fan_in)) init.

    Gain vectors initialize to 1 and shift vectors to 0 where a plan entry
    carries fan_in 0. Deterministic: the rng is consumed in plan order.
    """
    rng = np.random.default_rng(seed)
    params: dict[str, Tensor] = {}
    for name, shape, fan_in in descriptor.parameter_plan():
        if fan_in == 0:
            data = np.ones(shape) if name.endswith("gain") else np.zeros(shape)
        else:
            bound = 1.0 / np.sqrt(fan_in)
            data = rng.uniform(-bound, bound, size=shape)
        params[name] = Tensor(data, requires_grad=True)
    return ClassifierModel(descriptor, params)


def clone_parameters(model: ClassifierModel) -> ClassifierModel:
    """Deep, independent copy with the same descriptor."""
    params = {
        name: Tensor(p.data.copy(), requires_grad=p.requires_grad)
        for name, p in model.params.items()
    }
    return ClassifierModel(model.descriptor, params)


def parameter_hash(model: ClassifierModel) -> str:
    """Stable digest of all parameter values; equal params, equal digest."""
    h = hashlib.sha256()
    for name in sorted(model.params):
        p = model.params[name]
        h.update(name.encode())
        h.update(repr(p.shape).encode())
        h.update(np.ascontiguousarray(p.data, dtype="<f8").tobytes())
    return h.hexdigest()

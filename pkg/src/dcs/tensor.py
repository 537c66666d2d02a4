"""Dense float64 tensors with reverse-mode automatic differentiation.

The engine is define-by-run: while a :class:`GradTape` is active, every
differentiable operation whose output depends on a ``requires_grad`` tensor
appends one node (inputs, output, backward rule) to the tape, in execution
order. ``backward(loss)`` walks that list once in reverse, so each node is
visited exactly once and inputs are always processed after every use.

Outside a tape nothing is recorded, which is how evaluation-mode forward
passes (teacher inference, agreement scans) stay free of graph bookkeeping.

Storage is a flat row-major ``numpy`` float64 array per tensor. Broadcasting
is supported only in the trailing-axes form the model zoo needs
(``[B,C] + [C]``, ``[B,L,D] + [L,D]``, scalars); anything fancier raises.
"""

from __future__ import annotations

import threading

import numpy as np

from .errors import ConfigurationError, DimensionError

__all__ = [
    "Tensor",
    "GradTape",
    "backward",
    "matmul",
    "bmm",
    "transpose",
    "relu",
    "concat",
    "embedding",
    "layer_norm",
    "softmax",
    "log_softmax",
    "take_per_row",
]


class GradTape:
    """Execution-ordered record of differentiable operations.

    Use as a context manager around one forward pass; the tape is rebuilt
    from scratch for every pass. Nested tapes record to the innermost one.
    """

    def __init__(self):
        self.nodes: list[_Node] = []

    def __enter__(self) -> "GradTape":
        _tape_stack().append(self)
        return self

    def __exit__(self, exc_type, exc, tb) -> bool:
        popped = _tape_stack().pop()
        assert popped is self, "GradTape contexts must unwind in LIFO order"
        return False

    def __len__(self) -> int:
        return len(self.nodes)


# one tape stack per thread: concurrent runs never see each other's tapes
_LOCAL = threading.local()


def _tape_stack() -> list:
    stack = getattr(_LOCAL, "stack", None)
    if stack is None:
        stack = _LOCAL.stack = []
    return stack


def _active_tape() -> GradTape | None:
    stack = _tape_stack()
    return stack[-1] if stack else None


class _Node:
    """One recorded op: holds input/output tensors and the backward rule.

    ``backward_fn(out_grad)`` returns one gradient array per input, aligned
    with ``inputs``; ``None`` marks a slot that receives no gradient.
    """

    __slots__ = ("inputs", "output", "backward_fn")

    def __init__(self, inputs, output, backward_fn):
        self.inputs = inputs
        self.output = output
        self.backward_fn = backward_fn


class Tensor:
    """n-dimensional float64 array that can participate in the tape."""

    __slots__ = ("data", "requires_grad", "grad", "_tape")

    def __init__(self, data, requires_grad: bool = False):
        self.data = np.asarray(data, dtype=np.float64)
        self.requires_grad = requires_grad
        self.grad: np.ndarray | None = None
        self._tape: GradTape | None = None

    @property
    def shape(self) -> tuple[int, ...]:
        return self.data.shape

    @property
    def ndim(self) -> int:
        return self.data.ndim

    @property
    def size(self) -> int:
        return self.data.size

    def item(self) -> float:
        if self.data.size != 1:
            raise DimensionError(f"item() needs a scalar, got shape {self.shape}")
        return float(self.data.reshape(()))

    def zero_grad(self) -> None:
        self.grad = None

    def detach(self) -> "Tensor":
        """Copy of the values with no gradient participation."""
        return Tensor(self.data.copy(), requires_grad=False)

    # -- shape ops ---------------------------------------------------------

    def reshape(self, *shape) -> "Tensor":
        if len(shape) == 1 and isinstance(shape[0], (tuple, list)):
            shape = tuple(shape[0])
        old_shape = self.data.shape
        out = Tensor(self.data.reshape(shape), requires_grad=self.requires_grad)
        return _record(out, (self,), lambda g: (g.reshape(old_shape),))

    def sum(self, axis: int | None = None) -> "Tensor":
        out = Tensor(self.data.sum(axis=axis), requires_grad=self.requires_grad)
        shape, nd = self.data.shape, self.data.ndim

        def backward_fn(g):
            if axis is None:
                return (np.broadcast_to(g, shape).copy(),)
            return (np.broadcast_to(np.expand_dims(g, axis % nd), shape).copy(),)

        return _record(out, (self,), backward_fn)

    def mean(self, axis: int | None = None) -> "Tensor":
        out = Tensor(self.data.mean(axis=axis), requires_grad=self.requires_grad)
        shape, nd = self.data.shape, self.data.ndim
        count = self.data.size if axis is None else shape[axis % nd]

        def backward_fn(g):
            if axis is None:
                return (np.broadcast_to(g / count, shape).copy(),)
            return (np.broadcast_to(np.expand_dims(g, axis % nd) / count, shape).copy(),)

        return _record(out, (self,), backward_fn)

    # -- arithmetic --------------------------------------------------------

    def __add__(self, other):
        other = _as_tensor(other)
        data = _broadcast_op(self.data, other.data, np.add)
        out = Tensor(data, requires_grad=self.requires_grad or other.requires_grad)
        a_shape, b_shape = self.data.shape, other.data.shape
        return _record(
            out,
            (self, other),
            lambda g: (_unbroadcast(g, a_shape), _unbroadcast(g, b_shape)),
        )

    __radd__ = __add__

    def __sub__(self, other):
        other = _as_tensor(other)
        data = _broadcast_op(self.data, other.data, np.subtract)
        out = Tensor(data, requires_grad=self.requires_grad or other.requires_grad)
        a_shape, b_shape = self.data.shape, other.data.shape
        return _record(
            out,
            (self, other),
            lambda g: (_unbroadcast(g, a_shape), -_unbroadcast(g, b_shape)),
        )

    def __mul__(self, other):
        other = _as_tensor(other)
        data = _broadcast_op(self.data, other.data, np.multiply)
        out = Tensor(data, requires_grad=self.requires_grad or other.requires_grad)
        a, b = self, other
        return _record(
            out,
            (a, b),
            lambda g: (
                _unbroadcast(g * b.data, a.data.shape),
                _unbroadcast(g * a.data, b.data.shape),
            ),
        )

    __rmul__ = __mul__

    def __neg__(self):
        out = Tensor(-self.data, requires_grad=self.requires_grad)
        return _record(out, (self,), lambda g: (-g,))

    def __matmul__(self, other):
        return matmul(self, other)

    def __repr__(self) -> str:
        return f"Tensor(shape={self.shape}, requires_grad={self.requires_grad})"


def _as_tensor(value) -> Tensor:
    if isinstance(value, Tensor):
        return value
    return Tensor(np.asarray(value, dtype=np.float64))


def _broadcast_op(a: np.ndarray, b: np.ndarray, op) -> np.ndarray:
    """Apply a binary ufunc, permitting only trailing-axes broadcasting."""
    if a.shape != b.shape and not (
        _is_trailing(a.shape, b.shape) or _is_trailing(b.shape, a.shape)
    ):
        raise DimensionError(f"cannot broadcast shapes {a.shape} and {b.shape}")
    return op(a, b)


def _is_trailing(big: tuple, small: tuple) -> bool:
    if small == ():
        return True
    return len(small) <= len(big) and big[len(big) - len(small):] == small


def _unbroadcast(grad: np.ndarray, shape: tuple) -> np.ndarray:
    """Sum a gradient over the leading axes that broadcasting introduced."""
    if grad.shape == shape:
        return grad
    extra = grad.ndim - len(shape)
    if extra > 0:
        grad = grad.sum(axis=tuple(range(extra)))
    return grad.reshape(shape)


def _record(out: Tensor, inputs: tuple, backward_fn) -> Tensor:
    tape = _active_tape()
    if tape is not None and out.requires_grad:
        out._tape = tape
        tape.nodes.append(_Node(inputs, out, backward_fn))
    return out


# -- free-function ops -----------------------------------------------------


def matmul(a: Tensor, b: Tensor) -> Tensor:
    """Matrix product of two rank-2 tensors.

    Gradients follow dA = dC.B^T and dB = A^T.dC.
    """
    a, b = _as_tensor(a), _as_tensor(b)
    if a.ndim != 2 or b.ndim != 2:
        raise DimensionError(
            f"matmul needs two matrices, got shapes {a.shape} and {b.shape}"
        )
    if a.shape[1] != b.shape[0]:
        raise DimensionError(
            f"matmul inner dimensions disagree: {a.shape} vs {b.shape}"
        )
    out = Tensor(a.data @ b.data, requires_grad=a.requires_grad or b.requires_grad)
    return _record(
        out, (a, b), lambda g: (g @ b.data.T, a.data.T @ g)
    )


def bmm(a: Tensor, b: Tensor) -> Tensor:
    """Batched matrix product over a shared leading axis: [B,m,k] x [B,k,n]."""
    a, b = _as_tensor(a), _as_tensor(b)
    if a.ndim != 3 or b.ndim != 3:
        raise DimensionError(f"bmm needs rank-3 inputs, got {a.shape} and {b.shape}")
    if a.shape[0] != b.shape[0] or a.shape[2] != b.shape[1]:
        raise DimensionError(f"bmm shapes disagree: {a.shape} vs {b.shape}")
    out = Tensor(a.data @ b.data, requires_grad=a.requires_grad or b.requires_grad)
    return _record(
        out,
        (a, b),
        lambda g: (g @ b.data.transpose(0, 2, 1), a.data.transpose(0, 2, 1) @ g),
    )


def transpose(a: Tensor) -> Tensor:
    """Swap the last two axes."""
    a = _as_tensor(a)
    if a.ndim < 2:
        raise DimensionError(f"transpose needs rank >= 2, got shape {a.shape}")
    out = Tensor(np.swapaxes(a.data, -1, -2), requires_grad=a.requires_grad)
    return _record(out, (a,), lambda g: (np.swapaxes(g, -1, -2),))


def relu(a: Tensor) -> Tensor:
    a = _as_tensor(a)
    out = Tensor(np.maximum(a.data, 0.0), requires_grad=a.requires_grad)
    mask = a.data > 0.0
    return _record(out, (a,), lambda g: (g * mask,))


def concat(tensors, axis: int = 0) -> Tensor:
    """Concatenate tensors along an axis; gradient splits back."""
    tensors = [_as_tensor(t) for t in tensors]
    if not tensors:
        raise DimensionError("concat needs at least one tensor")
    data = np.concatenate([t.data for t in tensors], axis=axis)
    out = Tensor(data, requires_grad=any(t.requires_grad for t in tensors))
    sizes = [t.data.shape[axis] for t in tensors]
    bounds = np.cumsum(sizes)[:-1]

    def backward_fn(g):
        return tuple(np.split(g, bounds, axis=axis))

    return _record(out, tuple(tensors), backward_fn)


def embedding(table: Tensor, indices: np.ndarray) -> Tensor:
    """Row lookup ``table[indices]``; gradient scatter-adds into the table."""
    table = _as_tensor(table)
    if table.ndim != 2:
        raise DimensionError(f"embedding table must be rank 2, got {table.shape}")
    idx = np.asarray(indices)
    if not np.issubdtype(idx.dtype, np.integer):
        raise DimensionError("embedding indices must be integers")
    if idx.size and (idx.min() < 0 or idx.max() >= table.shape[0]):
        raise DimensionError(
            f"embedding index out of range for table with {table.shape[0]} rows"
        )
    out = Tensor(table.data[idx], requires_grad=table.requires_grad)

    def backward_fn(g):
        dt = np.zeros_like(table.data)
        np.add.at(dt, idx, g)
        return (dt,)

    return _record(out, (table,), backward_fn)


def layer_norm(x: Tensor, gain: Tensor, bias: Tensor, eps: float = 1e-5) -> Tensor:
    """Normalize over the last axis, then scale and shift."""
    x, gain, bias = _as_tensor(x), _as_tensor(gain), _as_tensor(bias)
    d = x.shape[-1]
    if gain.shape != (d,) or bias.shape != (d,):
        raise DimensionError(
            f"layer_norm gain/bias must have shape ({d},), got {gain.shape} / {bias.shape}"
        )
    mu = x.data.mean(axis=-1, keepdims=True)
    var = x.data.var(axis=-1, keepdims=True)
    inv = 1.0 / np.sqrt(var + eps)
    xhat = (x.data - mu) * inv
    out = Tensor(
        xhat * gain.data + bias.data,
        requires_grad=x.requires_grad or gain.requires_grad or bias.requires_grad,
    )
    reduce_axes = tuple(range(x.ndim - 1))

    def backward_fn(g):
        dgain = (g * xhat).sum(axis=reduce_axes)
        dbias = g.sum(axis=reduce_axes)
        dxhat = g * gain.data
        dx = inv * (
            dxhat
            - dxhat.mean(axis=-1, keepdims=True)
            - xhat * (dxhat * xhat).mean(axis=-1, keepdims=True)
        )
        return (dx, dgain, dbias)

    return _record(out, (x, gain, bias), backward_fn)


def _check_temperature(temperature: float) -> float:
    if not temperature > 0:
        raise ConfigurationError(f"temperature must be positive, got {temperature}")
    return float(temperature)


def softmax(logits: Tensor, temperature: float = 1.0) -> Tensor:
    """Temperature softmax over the last axis, with max-subtraction."""
    t = _check_temperature(temperature)
    logits = _as_tensor(logits)
    z = logits.data / t
    z = z - z.max(axis=-1, keepdims=True)
    e = np.exp(z)
    y = e / e.sum(axis=-1, keepdims=True)
    out = Tensor(y, requires_grad=logits.requires_grad)

    def backward_fn(g):
        dot = (g * y).sum(axis=-1, keepdims=True)
        return ((y * (g - dot)) / t,)

    return _record(out, (logits,), backward_fn)


def log_softmax(logits: Tensor, temperature: float = 1.0) -> Tensor:
    """log(softmax(logits/T)) via the logsumexp identity; overflow-safe."""
    t = _check_temperature(temperature)
    logits = _as_tensor(logits)
    z = logits.data / t
    m = z.max(axis=-1, keepdims=True)
    lse = m + np.log(np.exp(z - m).sum(axis=-1, keepdims=True))
    y = z - lse
    out = Tensor(y, requires_grad=logits.requires_grad)
    p = np.exp(y)

    def backward_fn(g):
        return ((g - p * g.sum(axis=-1, keepdims=True)) / t,)

    return _record(out, (logits,), backward_fn)


def take_per_row(a: Tensor, indices: np.ndarray) -> Tensor:
    """Pick ``a[i, indices[i]]`` for each row i of a matrix."""
    a = _as_tensor(a)
    if a.ndim != 2:
        raise DimensionError(f"take_per_row needs a matrix, got shape {a.shape}")
    idx = np.asarray(indices)
    if idx.shape != (a.shape[0],):
        raise DimensionError(
            f"need one index per row: {idx.shape} vs {a.shape[0]} rows"
        )
    rows = np.arange(a.shape[0])
    out = Tensor(a.data[rows, idx], requires_grad=a.requires_grad)

    def backward_fn(g):
        da = np.zeros_like(a.data)
        np.add.at(da, (rows, idx), g)
        return (da,)

    return _record(out, (a,), backward_fn)


def backward(loss: Tensor) -> None:
    """Reverse-accumulate gradients of a scalar loss over its tape.

    Every ``requires_grad`` tensor the loss depends on gets ``grad``
    populated. Calling again without zeroing adds another full pass worth
    of gradient on top.
    """
    if loss.data.ndim != 0:
        raise DimensionError(f"backward needs a scalar loss, got shape {loss.shape}")
    tape = loss._tape
    if tape is None:
        raise ConfigurationError(
            "loss was not recorded on a GradTape; run the forward pass inside "
            "`with GradTape():` and make sure some input requires_grad"
        )
    # Per-pass adjoints live in a scratch dict so that repeated backward()
    # calls stay additive instead of compounding stale values.
    adjoint: dict[int, np.ndarray] = {id(loss): np.ones_like(loss.data)}
    holders: dict[int, Tensor] = {id(loss): loss}
    for node in reversed(tape.nodes):
        g = adjoint.get(id(node.output))
        if g is None:
            continue
        grads = node.backward_fn(g)
        for inp, gi in zip(node.inputs, grads):
            if gi is None or not inp.requires_grad:
                continue
            key = id(inp)
            prev = adjoint.get(key)
            adjoint[key] = gi if prev is None else prev + gi
            holders[key] = inp
    for key, tensor in holders.items():
        contribution = adjoint[key]
        if tensor.grad is None:
            tensor.grad = contribution.copy()
        else:
            tensor.grad += contribution

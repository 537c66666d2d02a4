"""Gradient-check case registry: one entry per differentiable op.

Each case returns (input array, builder); the builder maps a tensor to a
scalar through the op under test plus a fixed random projection, so each
op's backward rule faces the finite-difference oracle directly.
"""

import numpy as np

from dcs import (
    Tensor,
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


# Each case maps an input array to a scalar through the op under test plus
# a fixed random projection, so every op's backward rule faces the oracle.


def _proj(rng, shape):
    v = rng.normal(size=shape)
    return lambda t: (t * Tensor(v)).sum()


GRADCHECK_CASES = {}


def gradcheck_case(name):
    def register(fn):
        GRADCHECK_CASES[name] = fn
        return fn

    return register


@gradcheck_case("add")
def _case_add(rng):
    other = Tensor(rng.normal(size=(3, 4)))
    reduce = _proj(rng, (3, 4))
    return rng.normal(size=(3, 4)), lambda t: reduce(t + other)


@gradcheck_case("add_broadcast")
def _case_add_broadcast(rng):
    row = Tensor(rng.normal(size=4))
    reduce = _proj(rng, (3, 4))
    return rng.normal(size=(3, 4)), lambda t: reduce(t + row)


@gradcheck_case("sub")
def _case_sub(rng):
    other = Tensor(rng.normal(size=(3, 4)))
    reduce = _proj(rng, (3, 4))
    return rng.normal(size=(3, 4)), lambda t: reduce(other - t)


@gradcheck_case("mul")
def _case_mul(rng):
    other = Tensor(rng.normal(size=(3, 4)))
    reduce = _proj(rng, (3, 4))
    return rng.normal(size=(3, 4)), lambda t: reduce(t * other)


@gradcheck_case("mul_scalar")
def _case_mul_scalar(rng):
    s = float(rng.normal())
    reduce = _proj(rng, (3, 4))
    return rng.normal(size=(3, 4)), lambda t: reduce(t * s)


@gradcheck_case("mul_self")
def _case_mul_self(rng):
    reduce = _proj(rng, (3, 4))
    return rng.normal(size=(3, 4)), lambda t: reduce(t * t)


@gradcheck_case("neg")
def _case_neg(rng):
    reduce = _proj(rng, (3, 4))
    return rng.normal(size=(3, 4)), lambda t: reduce(-t)


@gradcheck_case("matmul_lhs")
def _case_matmul_lhs(rng):
    w = Tensor(rng.normal(size=(4, 2)))
    reduce = _proj(rng, (3, 2))
    return rng.normal(size=(3, 4)), lambda t: reduce(matmul(t, w))


@gradcheck_case("matmul_rhs")
def _case_matmul_rhs(rng):
    a = Tensor(rng.normal(size=(3, 4)))
    reduce = _proj(rng, (3, 2))
    return rng.normal(size=(4, 2)), lambda t: reduce(matmul(a, t))


@gradcheck_case("bmm_lhs")
def _case_bmm_lhs(rng):
    b = Tensor(rng.normal(size=(2, 4, 3)))
    reduce = _proj(rng, (2, 3, 3))
    return rng.normal(size=(2, 3, 4)), lambda t: reduce(bmm(t, b))


@gradcheck_case("bmm_rhs")
def _case_bmm_rhs(rng):
    a = Tensor(rng.normal(size=(2, 3, 4)))
    reduce = _proj(rng, (2, 3, 3))
    return rng.normal(size=(2, 4, 3)), lambda t: reduce(bmm(a, t))


@gradcheck_case("transpose")
def _case_transpose(rng):
    reduce = _proj(rng, (4, 3))
    return rng.normal(size=(3, 4)), lambda t: reduce(transpose(t))


@gradcheck_case("reshape")
def _case_reshape(rng):
    reduce = _proj(rng, (2, 6))
    return rng.normal(size=(3, 4)), lambda t: reduce(t.reshape(2, 6))


@gradcheck_case("relu")
def _case_relu(rng):
    x = rng.normal(size=(3, 4))
    x[np.abs(x) < 0.05] = 0.1  # keep clear of the kink
    reduce = _proj(rng, (3, 4))
    return x, lambda t: reduce(relu(t))


@gradcheck_case("sum_all")
def _case_sum_all(rng):
    return rng.normal(size=(3, 4)), lambda t: t.sum()


@gradcheck_case("sum_axis")
def _case_sum_axis(rng):
    reduce = _proj(rng, (3,))
    return rng.normal(size=(3, 4)), lambda t: reduce(t.sum(axis=1))


@gradcheck_case("mean_all")
def _case_mean_all(rng):
    return rng.normal(size=(3, 4)), lambda t: t.mean()


@gradcheck_case("mean_axis")
def _case_mean_axis(rng):
    reduce = _proj(rng, (4,))
    return rng.normal(size=(3, 4)), lambda t: reduce(t.mean(axis=0))


@gradcheck_case("concat")
def _case_concat(rng):
    other = Tensor(rng.normal(size=(2, 4)))
    reduce = _proj(rng, (5, 4))
    return rng.normal(size=(3, 4)), lambda t: reduce(concat([t, other], axis=0))


@gradcheck_case("embedding")
def _case_embedding(rng):
    idx = rng.integers(0, 5, size=(3, 4))
    reduce = _proj(rng, (3, 4, 2))
    return rng.normal(size=(5, 2)), lambda t: reduce(embedding(t, idx))


@gradcheck_case("layer_norm_x")
def _case_layer_norm_x(rng):
    gain = Tensor(rng.normal(size=4))
    bias = Tensor(rng.normal(size=4))
    reduce = _proj(rng, (3, 4))
    return rng.normal(size=(3, 4)), lambda t: reduce(layer_norm(t, gain, bias))


@gradcheck_case("layer_norm_gain")
def _case_layer_norm_gain(rng):
    x = Tensor(rng.normal(size=(3, 4)))
    bias = Tensor(rng.normal(size=4))
    reduce = _proj(rng, (3, 4))
    return rng.normal(size=4), lambda t: reduce(layer_norm(x, t, bias))


@gradcheck_case("layer_norm_bias")
def _case_layer_norm_bias(rng):
    x = Tensor(rng.normal(size=(3, 4)))
    gain = Tensor(rng.normal(size=4))
    reduce = _proj(rng, (3, 4))
    return rng.normal(size=4), lambda t: reduce(layer_norm(x, gain, t))


@gradcheck_case("softmax")
def _case_softmax(rng):
    t_val = float(rng.uniform(0.5, 3.0))
    reduce = _proj(rng, (3, 4))
    return rng.normal(scale=2.0, size=(3, 4)), lambda t: reduce(softmax(t, t_val))


@gradcheck_case("log_softmax")
def _case_log_softmax(rng):
    t_val = float(rng.uniform(0.5, 3.0))
    reduce = _proj(rng, (3, 4))
    return rng.normal(scale=2.0, size=(3, 4)), lambda t: reduce(log_softmax(t, t_val))


@gradcheck_case("take_per_row")
def _case_take_per_row(rng):
    idx = rng.integers(0, 4, size=3)
    reduce = _proj(rng, (3,))
    return rng.normal(size=(3, 4)), lambda t: reduce(take_per_row(t, idx))


@gradcheck_case("composed_graph")
def _case_composed(rng):
    w = Tensor(rng.normal(size=(4, 3)))
    b = Tensor(rng.normal(size=3))
    idx = rng.integers(0, 3, size=3)
    return (
        rng.normal(size=(3, 4)),
        lambda t: -take_per_row(log_softmax(relu(matmul(t, w) + b), 1.0), idx).mean(),
    )



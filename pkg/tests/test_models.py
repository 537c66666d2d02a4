"""Model zoo: determinism, shape contracts, cloning, hashing, gradient flow."""

import numpy as np
import pytest

from dcs import (
    ArchitectureDescriptor,
    ConfigurationError,
    DimensionError,
    GradTape,
    Tensor,
    backward,
    build_model,
    clone_parameters,
    cross_entropy,
    parameter_hash,
    softmax,
)

LINEAR = ArchitectureDescriptor(kind="linear", n_classes=2, input_dim=4)
MLP = ArchitectureDescriptor(kind="mlp", n_classes=3, input_dim=10, hidden_dims=(16,))
TRANSFORMER = ArchitectureDescriptor(
    kind="tiny_transformer", n_classes=2, vocab_size=64, seq_len=6, embed_dim=8
)


def test_build_is_deterministic_bitwise():
    a = build_model(LINEAR, seed=7)
    b = build_model(LINEAR, seed=7)
    for name in a.params:
        assert np.array_equal(a.params[name].data, b.params[name].data)
    assert parameter_hash(a) == parameter_hash(b)
    assert parameter_hash(a) != parameter_hash(build_model(LINEAR, seed=8))


def test_mlp_parameter_count():
    # 10*16 + 16 + 16*3 + 3
    assert MLP.parameter_count() == 227


def test_descriptor_round_trip():
    for desc in (LINEAR, MLP, TRANSFORMER):
        assert ArchitectureDescriptor.from_dict(desc.to_dict()) == desc


def test_descriptor_rejects_bad_dims():
    with pytest.raises(ConfigurationError):
        ArchitectureDescriptor(kind="linear", n_classes=1, input_dim=4)
    with pytest.raises(ConfigurationError):
        ArchitectureDescriptor(kind="mlp", n_classes=2, input_dim=0)
    with pytest.raises(ConfigurationError):
        ArchitectureDescriptor(kind="tiny_transformer", n_classes=2, vocab_size=8, seq_len=0, embed_dim=4)
    with pytest.raises(ConfigurationError):
        ArchitectureDescriptor.from_dict({"kind": "mlp", "n_classes": 2, "input_dim": 3, "bogus": 1})


def test_teacher_student_shape_compatibility():
    for desc in (LINEAR, MLP, TRANSFORMER):
        teacher = build_model(desc, seed=0)
        student = build_model(desc, seed=1)
        assert list(teacher.params) == list(student.params)
        for name in teacher.params:
            assert teacher.params[name].shape == student.params[name].shape


def test_linear_zero_weights_give_zero_logits():
    model = build_model(LINEAR, seed=0)
    for p in model.params.values():
        p.data[...] = 0.0
    out = model.forward(np.random.default_rng(0).normal(size=(5, 4)))
    assert np.array_equal(out.data, np.zeros((5, 2)))


def test_forward_deterministic():
    model = build_model(MLP, seed=3)
    x = np.random.default_rng(1).normal(size=(8, 10))
    assert np.array_equal(model.forward(x).data, model.forward(x).data)


def test_transformer_logit_shape():
    model = build_model(TRANSFORMER, seed=5)
    ids = np.random.default_rng(2).integers(0, 64, size=(5, 6))
    assert model.forward(ids).shape == (5, 2)


def test_transformer_batch_permutation_oracle():
    model = build_model(TRANSFORMER, seed=9)
    rng = np.random.default_rng(3)
    for _ in range(3):
        ids = rng.integers(0, 64, size=(7, 6))
        perm = rng.permutation(7)
        np.testing.assert_allclose(
            model.forward(ids[perm]).data,
            model.forward(ids).data[perm],
            rtol=1e-12,
            atol=1e-12,
        )


def test_forward_rejects_wrong_width():
    model = build_model(MLP, seed=0)
    with pytest.raises(DimensionError):
        model.forward(np.zeros((4, 7)))
    tf = build_model(TRANSFORMER, seed=0)
    with pytest.raises(DimensionError):
        tf.forward(np.zeros((4, 5), dtype=np.int64))
    with pytest.raises(DimensionError):
        tf.forward(np.zeros((4, 6)))  # float features, not token ids


def test_predict_argmax_and_tie_break():
    model = build_model(LINEAR, seed=0)
    for p in model.params.values():
        p.data[...] = 0.0
    model.params["b"].data[:] = [0.2, 0.9]
    assert model.predict(np.zeros((1, 4)))[0] == 1
    model.params["b"].data[:] = [0.5, 0.5]
    assert model.predict(np.zeros((1, 4)))[0] == 0  # tie -> lowest index


def test_predict_matches_argmax_of_softmax():
    model = build_model(MLP, seed=4)
    x = np.random.default_rng(5).normal(size=(20, 10))
    logits = model.forward(x)
    via_softmax = np.argmax(softmax(logits).data, axis=1)
    assert np.array_equal(model.predict(x), via_softmax)


def test_clone_is_deep_and_independent():
    model = build_model(MLP, seed=6)
    copy = clone_parameters(model)
    assert parameter_hash(copy) == parameter_hash(model)
    copy.params["w0"].data += 1.0
    assert parameter_hash(copy) != parameter_hash(model)
    assert np.array_equal(
        build_model(MLP, seed=6).params["w0"].data, model.params["w0"].data
    )


def test_gradient_reaches_every_mlp_parameter():
    model = build_model(MLP, seed=8)
    rng = np.random.default_rng(9)
    x = rng.normal(size=(6, 10))
    y = rng.integers(0, 3, size=6)
    with GradTape():
        backward(cross_entropy(model.forward(x), y))
    for name, p in model.params.items():
        assert p.grad is not None, f"no grad for {name}"
        assert np.any(p.grad != 0.0), f"grad for {name} is all zero"


def test_frozen_model_records_nothing():
    model = build_model(MLP, seed=8)
    model.set_trainable(False)
    x = np.random.default_rng(0).normal(size=(2, 10))
    with GradTape() as tape:
        model.forward(x)
    assert len(tape) == 0

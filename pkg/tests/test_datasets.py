"""Task generation and ingestion: determinism, noise, hashing, subsampling."""

import json

import numpy as np
import pytest

from dcs import (
    ArchitectureDescriptor,
    ConfigurationError,
    DataError,
    DistillationConfig,
    TaskSpec,
    build_model,
    fnv1a64,
    generate_synthetic,
    load_text_sequences,
    load_text_task,
    make_transfer_pair,
    run_dcs,
    subsample,
)

SPEC = TaskSpec(
    kind="gaussian_mixture", n_train=200, n_dev=150, n_classes=3,
    input_dim=5, label_noise_rate=0.2, class_separation=4.0, seed=11,
)


def test_generation_is_deterministic():
    t1, d1 = generate_synthetic(SPEC)
    t2, d2 = generate_synthetic(SPEC)
    assert np.array_equal(t1.features, t2.features)
    assert np.array_equal(t1.labels, t2.labels)
    assert np.array_equal(d1.features, d2.features)
    assert np.array_equal(d1.labels, d2.labels)


def test_noise_flips_train_labels_only():
    noisy_train, noisy_dev = generate_synthetic(SPEC)
    clean_spec = TaskSpec(**{**SPEC.to_dict(), "label_noise_rate": 0.0})
    clean_train, clean_dev = generate_synthetic(clean_spec)
    # features identical, dev untouched
    assert np.array_equal(noisy_train.features, clean_train.features)
    assert np.array_equal(noisy_dev.labels, clean_dev.labels)
    flipped = np.sum(noisy_train.labels != clean_train.labels)
    assert 0 < flipped < len(noisy_train)
    # regeneration-diff recount: the flip count is reproducible exactly
    again, _ = generate_synthetic(SPEC)
    assert np.sum(again.labels != clean_train.labels) == flipped
    # every flip landed on a *different* class
    mask = noisy_train.labels != clean_train.labels
    assert np.all(noisy_train.labels[mask] != clean_train.labels[mask])


def test_flip_count_is_near_the_rate():
    spec = TaskSpec(**{**SPEC.to_dict(), "n_train": 2000})
    clean = TaskSpec(**{**spec.to_dict(), "label_noise_rate": 0.0})
    noisy_train, _ = generate_synthetic(spec)
    clean_train, _ = generate_synthetic(clean)
    rate = np.mean(noisy_train.labels != clean_train.labels)
    assert abs(rate - 0.2) < 0.03


def test_split_contents_are_disjoint():
    train, dev = generate_synthetic(SPEC)
    train_rows = {row.tobytes() for row in train.features}
    dev_rows = {row.tobytes() for row in dev.features}
    assert not train_rows & dev_rows


def test_xor_blobs_need_nonlinearity():
    spec = TaskSpec(
        kind="xor_blobs", n_train=300, n_dev=200, n_classes=2,
        input_dim=2, class_separation=6.0, seed=5,
    )
    train, dev = generate_synthetic(spec)
    assert set(np.unique(train.labels)) == {0, 1}
    arch = ArchitectureDescriptor(kind="linear", n_classes=2, input_dim=2)
    config = DistillationConfig(
        task=spec, arch=arch, strategy="vanilla", alpha=1.0,
        epochs=20, batch_size=16, learning_rate=0.05, seeds=(0,),
    )
    _, history, _ = run_dcs(None, build_model(arch, 0), train, dev, config, 0)
    assert history.best_dev_accuracy < 0.75  # linear model cannot solve xor


def test_separable_task_is_linearly_learnable_to_99():
    spec = TaskSpec(
        kind="gaussian_mixture", n_train=200, n_dev=400, n_classes=2,
        input_dim=4, label_noise_rate=0.0, class_separation=6.0, seed=2,
    )
    train, dev = generate_synthetic(spec)
    arch = ArchitectureDescriptor(kind="linear", n_classes=2, input_dim=4)
    config = DistillationConfig(
        task=spec, arch=arch, strategy="vanilla", alpha=1.0,
        epochs=30, batch_size=16, learning_rate=0.05, seeds=(0,),
    )
    _, history, _ = run_dcs(None, build_model(arch, 0), train, dev, config, 0)
    assert history.best_dev_accuracy >= 0.99


def test_spec_validation():
    with pytest.raises(ConfigurationError):
        TaskSpec(kind="gaussian_mixture", n_train=3, n_classes=2)
    with pytest.raises(ConfigurationError):
        TaskSpec(kind="gaussian_mixture", label_noise_rate=0.5)
    with pytest.raises(ConfigurationError):
        TaskSpec(kind="xor_blobs", n_classes=3)
    with pytest.raises(ConfigurationError):
        TaskSpec(kind="mystery")
    with pytest.raises(ConfigurationError):
        TaskSpec.from_dict({"kind": "gaussian_mixture", "n_trian": 100})


# ------------------------------------------------------------------- text


def write_jsonl(path, rows):
    path.write_text("\n".join(json.dumps(r) for r in rows) + "\n", encoding="utf-8")


def test_fnv1a64_published_vectors():
    # reference values for the 64-bit FNV-1a parameters
    assert fnv1a64("") == 14695981039346656037
    assert fnv1a64("a") == 0xAF63DC4C8601EC8C
    assert fnv1a64("foobar") == 0x85944171F73967E8


def test_text_counting_semantics(tmp_path):
    path = tmp_path / "task.jsonl"
    write_jsonl(path, [{"text": "good good bad", "label": "pos"}])
    train, dev = load_text_task(path, hash_dim=8)
    expected = np.zeros(8)
    expected[fnv1a64("good") % 8] += 2
    expected[fnv1a64("bad") % 8] += 1
    assert np.array_equal(train.features[0], expected)
    assert len(dev) == 0


def test_text_lowercases_and_splits_on_whitespace(tmp_path):
    path = tmp_path / "task.jsonl"
    write_jsonl(path, [{"text": "Good\tGOOD  bad", "label": "pos"}])
    train, _ = load_text_task(path, hash_dim=16)
    expected = np.zeros(16)
    expected[fnv1a64("good") % 16] += 2
    expected[fnv1a64("bad") % 16] += 1
    assert np.array_equal(train.features[0], expected)


def test_empty_text_gives_zero_vector(tmp_path):
    path = tmp_path / "task.jsonl"
    write_jsonl(path, [{"text": "", "label": "a"}, {"text": "x", "label": "b"}])
    train, _ = load_text_task(path, hash_dim=4)
    assert np.array_equal(train.features[0], np.zeros(4))


def test_text_labels_map_in_sorted_order(tmp_path):
    path = tmp_path / "task.jsonl"
    write_jsonl(
        path,
        [
            {"text": "x", "label": "zebra"},
            {"text": "y", "label": "apple"},
            {"text": "z", "label": "apple", "split": "dev"},
        ],
    )
    train, dev = load_text_task(path, hash_dim=4)
    assert train.labels.tolist() == [1, 0]  # apple=0, zebra=1
    assert dev.labels.tolist() == [0]
    assert train.n_classes == 2


def test_shuffled_file_gives_same_multiset(tmp_path):
    rows = [
        {"text": f"tok{i} tok{i % 3}", "label": f"l{i % 2}"} for i in range(20)
    ]
    a, b = tmp_path / "a.jsonl", tmp_path / "b.jsonl"
    write_jsonl(a, rows)
    write_jsonl(b, list(reversed(rows)))
    ta, _ = load_text_task(a, hash_dim=32)
    tb, _ = load_text_task(b, hash_dim=32)
    multiset_a = sorted((row.tobytes(), label) for row, label in zip(ta.features, ta.labels))
    multiset_b = sorted((row.tobytes(), label) for row, label in zip(tb.features, tb.labels))
    assert multiset_a == multiset_b


def test_malformed_line_reports_line_number(tmp_path):
    path = tmp_path / "task.jsonl"
    path.write_text('{"text": "ok", "label": "a"}\n{broken\n', encoding="utf-8")
    with pytest.raises(DataError) as err:
        load_text_task(path, hash_dim=4)
    assert ":2:" in str(err.value)


def test_missing_keys_and_bad_split_are_data_errors(tmp_path):
    path = tmp_path / "task.jsonl"
    write_jsonl(path, [{"text": "ok"}])
    with pytest.raises(DataError):
        load_text_task(path, hash_dim=4)
    write_jsonl(path, [{"text": "ok", "label": "a", "split": "test"}])
    with pytest.raises(DataError):
        load_text_task(path, hash_dim=4)


def test_too_many_labels_for_n_classes(tmp_path):
    path = tmp_path / "task.jsonl"
    write_jsonl(path, [{"text": "x", "label": "a"}, {"text": "y", "label": "b"}])
    with pytest.raises(DataError):
        load_text_task(path, hash_dim=4, n_classes=1)


def test_sequence_loader_pads_and_truncates(tmp_path):
    path = tmp_path / "task.jsonl"
    write_jsonl(
        path,
        [
            {"text": "a b c d e", "label": "x"},
            {"text": "a", "label": "y"},
        ],
    )
    train, _ = load_text_sequences(path, vocab_size=16, seq_len=3)
    assert train.features.shape == (2, 3)
    assert train.features.dtype == np.int64
    assert np.all(train.features >= 0) and np.all(train.features < 16)
    assert train.features[1].tolist()[1:] == [0, 0]  # padded
    assert train.features[1, 0] == fnv1a64("a") % 15 + 1


# --------------------------------------------------------------- subsample


def test_subsample_identity_when_k_equals_n():
    train, _ = generate_synthetic(SPEC)
    sub = subsample(train, len(train), seed=0)
    assert np.array_equal(sub.features, train.features)
    assert np.array_equal(sub.labels, train.labels)
    assert np.array_equal(sub.origin_ids, np.arange(len(train)))


def test_subsample_keeps_every_class():
    spec = TaskSpec(
        kind="gaussian_mixture", n_train=1000, n_dev=10, n_classes=2,
        input_dim=3, seed=9,
    )
    train, _ = generate_synthetic(spec)
    for seed in range(10):
        sub = subsample(train, 10, seed=seed)
        assert set(np.unique(sub.labels)) == {0, 1}
        assert len(sub) == 10


def test_subsample_seeded():
    train, _ = generate_synthetic(SPEC)
    a = subsample(train, 50, seed=1)
    b = subsample(train, 50, seed=1)
    c = subsample(train, 50, seed=2)
    assert np.array_equal(a.origin_ids, b.origin_ids)
    assert not np.array_equal(a.origin_ids, c.origin_ids)


def test_subsample_origin_mapping_points_at_source_rows():
    train, _ = generate_synthetic(SPEC)
    sub = subsample(train, 30, seed=4)
    assert np.array_equal(sub.features, train.features[sub.origin_ids])
    assert np.array_equal(sub.labels, train.labels[sub.origin_ids])


def test_subsample_rejects_k_below_n_classes():
    train, _ = generate_synthetic(SPEC)
    with pytest.raises(ConfigurationError):
        subsample(train, 2, seed=0)  # 3 classes


# ------------------------------------------------------------ transfer pair


def test_transfer_pair_shifts_target():
    (src_train, _), (tgt_train, tgt_dev) = make_transfer_pair(SPEC, target_n_train=40)
    assert len(src_train) == SPEC.n_train
    assert len(tgt_train) == 40
    assert len(tgt_dev) == SPEC.n_dev
    # deterministic
    (_, _), (tgt_again, _) = make_transfer_pair(SPEC, target_n_train=40)
    assert np.array_equal(tgt_train.features, tgt_again.features)
    # the shift moved the target's overall mean away from the source's
    gap = np.linalg.norm(src_train.features.mean(axis=0) - tgt_train.features.mean(axis=0))
    assert gap > 0.5

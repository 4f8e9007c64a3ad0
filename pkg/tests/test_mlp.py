"""Tests for MNIST ingestion, augmentation, the network, and training."""

import math

import numpy as np
import pytest

from conftest import write_idx_images, write_idx_labels
from gradfilt.errors import (
    ConfigError,
    DataError,
    IdxDimensionError,
    IdxMagicError,
    IdxTruncatedError,
)
from gradfilt.mlp import (
    Dataset,
    MLPModel,
    augment_pad_crop,
    backward,
    evaluate,
    forward,
    init_mlp,
    load_mnist_idx,
    softmax_cross_entropy,
    train,
)
from gradfilt.optimizers import default_config


# --- IDX loading ---------------------------------------------------------


def test_load_roundtrip(tiny_idx_pair):
    img_path, lab_path, images, labels = tiny_idx_pair
    ds = load_mnist_idx(img_path, lab_path)
    assert len(ds) == 12
    assert np.array_equal(ds.images, images)
    assert np.array_equal(ds.labels, labels)
    assert ds.labels.dtype == np.int64


def test_load_plain_uncompressed(tmp_path):
    images = np.zeros((3, 28, 28), dtype=np.uint8)
    labels = np.array([1, 2, 3], dtype=np.uint8)
    img = write_idx_images(str(tmp_path / "i.idx"), images)
    lab = write_idx_labels(str(tmp_path / "l.idx"), labels)
    ds = load_mnist_idx(img, lab)
    assert np.array_equal(ds.labels, [1, 2, 3])


def test_load_rejects_wrong_magic(tmp_path):
    images = np.zeros((2, 28, 28), dtype=np.uint8)
    labels = np.zeros(2, dtype=np.uint8)
    bad_img = write_idx_images(str(tmp_path / "i.idx"), images, magic=2052)
    good_lab = write_idx_labels(str(tmp_path / "l.idx"), labels)
    with pytest.raises(IdxMagicError):
        load_mnist_idx(bad_img, good_lab)
    # swapping the files is the classic mistake; the magic catches it
    good_img = write_idx_images(str(tmp_path / "i2.idx"), images)
    with pytest.raises(IdxMagicError):
        load_mnist_idx(good_lab, good_img)


def test_load_rejects_truncated_payload(tmp_path):
    images = np.zeros((2, 28, 28), dtype=np.uint8)
    labels = np.zeros(2, dtype=np.uint8)
    img = write_idx_images(str(tmp_path / "i.idx"), images, truncate_by=10)
    lab = write_idx_labels(str(tmp_path / "l.idx"), labels)
    with pytest.raises(IdxTruncatedError):
        load_mnist_idx(img, lab)


def test_load_rejects_tiny_file(tmp_path):
    path = tmp_path / "stub.idx"
    path.write_bytes(b"\x00\x00")
    lab = write_idx_labels(
        str(tmp_path / "l.idx"), np.zeros(1, dtype=np.uint8)
    )
    with pytest.raises(IdxTruncatedError):
        load_mnist_idx(str(path), lab)


def test_load_rejects_count_mismatch(tmp_path):
    img = write_idx_images(
        str(tmp_path / "i.idx"), np.zeros((3, 28, 28), dtype=np.uint8)
    )
    lab = write_idx_labels(
        str(tmp_path / "l.idx"), np.zeros(2, dtype=np.uint8)
    )
    with pytest.raises(IdxDimensionError):
        load_mnist_idx(img, lab)


def test_load_rejects_wrong_image_size(tmp_path):
    img = write_idx_images(
        str(tmp_path / "i.idx"), np.zeros((2, 27, 27), dtype=np.uint8)
    )
    lab = write_idx_labels(
        str(tmp_path / "l.idx"), np.zeros(2, dtype=np.uint8)
    )
    with pytest.raises(IdxDimensionError):
        load_mnist_idx(img, lab)


def test_load_rejects_out_of_range_label(tmp_path):
    img = write_idx_images(
        str(tmp_path / "i.idx"), np.zeros((2, 28, 28), dtype=np.uint8)
    )
    lab = write_idx_labels(
        str(tmp_path / "l.idx"), np.array([3, 10], dtype=np.uint8)
    )
    with pytest.raises(DataError):
        load_mnist_idx(img, lab)


def test_load_real_mnist(mnist_paths):
    train_ds = load_mnist_idx(
        mnist_paths["train_images"], mnist_paths["train_labels"]
    )
    test_ds = load_mnist_idx(
        mnist_paths["test_images"], mnist_paths["test_labels"]
    )
    assert len(train_ds) == 60_000
    assert len(test_ds) == 10_000
    assert train_ds.images.shape == (60_000, 28, 28)
    assert set(np.unique(test_ds.labels)) == set(range(10))


# --- augmentation --------------------------------------------------------


def test_augment_center_is_identity():
    rng = np.random.default_rng(1)
    img = rng.integers(0, 256, size=(28, 28), dtype=np.uint8)
    out = augment_pad_crop(img, offset=(2, 2))
    assert np.array_equal(out, img)
    assert out.dtype == img.dtype


def test_augment_corner_offsets_shift():
    rng = np.random.default_rng(2)
    img = rng.integers(0, 256, size=(28, 28), dtype=np.uint8)
    down_right = augment_pad_crop(img, offset=(0, 0))
    assert np.array_equal(down_right[2:, 2:], img[:26, :26])
    assert not down_right[:2, :].any()
    assert not down_right[:, :2].any()
    up_left = augment_pad_crop(img, offset=(4, 4))
    assert np.array_equal(up_left[:26, :26], img[2:, 2:])
    assert not up_left[26:, :].any()


def test_augment_preserves_interior_mass():
    # content confined to the central 24x24 never leaves the crop window
    img = np.zeros((28, 28), dtype=np.uint8)
    img[2:26, 2:26] = np.random.default_rng(3).integers(
        0, 256, size=(24, 24), dtype=np.uint8
    )
    total = int(img.sum())
    for r in range(5):
        for c in range(5):
            out = augment_pad_crop(img, offset=(r, c))
            assert int(out.sum()) == total


def test_augment_rng_draws_are_in_range():
    rng = np.random.default_rng(4)
    img = np.arange(784, dtype=np.uint8).reshape(28, 28)
    seen = {
        augment_pad_crop(img, rng).tobytes() for _ in range(200)
    }
    assert 1 < len(seen) <= 25


def test_augment_validation():
    with pytest.raises(ConfigError):
        augment_pad_crop(np.zeros((27, 28), dtype=np.uint8), offset=(0, 0))
    with pytest.raises(ConfigError):
        augment_pad_crop(np.zeros((28, 28), dtype=np.uint8), offset=(5, 0))
    with pytest.raises(ConfigError):
        augment_pad_crop(np.zeros((28, 28), dtype=np.uint8))  # no rng


# --- network -------------------------------------------------------------


def _zero_model(n_in=4, n_hidden=3, n_out=10, activation="relu"):
    return MLPModel(
        W1=np.zeros((n_in, n_hidden)),
        b1=np.zeros(n_hidden),
        W2=np.zeros((n_hidden, n_out)),
        b2=np.zeros(n_out),
        activation=activation,
    )


def test_forward_zero_model_gives_uniform_loss():
    model = _zero_model()
    x = np.random.default_rng(5).standard_normal((6, 4))
    logits, cache = forward(model, x)
    assert np.array_equal(logits, np.zeros((6, 10)))
    loss, dlogits = softmax_cross_entropy(logits, np.zeros(6, dtype=int))
    assert loss == pytest.approx(math.log(10.0), abs=1e-12)
    assert cache["x"].shape == (6, 4)


def test_forward_identity_activation_is_linear():
    rng = np.random.default_rng(6)
    model = MLPModel(
        W1=rng.standard_normal((5, 4)),
        b1=np.zeros(4),
        W2=rng.standard_normal((4, 3)),
        b2=np.zeros(3),
        activation="identity",
    )
    x = rng.standard_normal((7, 5))
    logits, _ = forward(model, x)
    assert np.allclose(logits, x @ model.W1 @ model.W2, atol=1e-12)


def test_forward_relu_clips_hidden():
    model = MLPModel(
        W1=np.array([[1.0, -1.0]]),
        b1=np.zeros(2),
        W2=np.eye(2),
        b2=np.zeros(2),
        activation="relu",
    )
    logits, cache = forward(model, np.array([[3.0]]))
    assert np.array_equal(cache["h"], [[3.0, 0.0]])
    assert np.array_equal(logits, [[3.0, 0.0]])


def test_softmax_cross_entropy_example():
    logits = np.array([[0.0, math.log(3.0)]])
    labels = np.array([1])
    loss, dlogits = softmax_cross_entropy(logits, labels)
    assert loss == pytest.approx(-math.log(0.75), abs=1e-12)
    assert np.allclose(dlogits, [[0.25, -0.25]], atol=1e-12)
    # gradient rows always sum to zero
    assert abs(dlogits.sum()) < 1e-12


def test_softmax_is_shift_invariant():
    rng = np.random.default_rng(7)
    logits = rng.standard_normal((5, 10)) * 50
    labels = rng.integers(0, 10, size=5)
    l1, d1 = softmax_cross_entropy(logits, labels)
    l2, d2 = softmax_cross_entropy(logits + 123.0, labels)
    assert l1 == pytest.approx(l2, rel=1e-12)
    assert np.allclose(d1, d2, atol=1e-12)


@pytest.mark.parametrize("activation", ["tanh", "relu", "identity"])
def test_backward_matches_finite_differences(activation):
    rng = np.random.default_rng(8)
    model = init_mlp(rng, sizes=(12, 4, 3), activation=activation)
    x = rng.standard_normal((5, 12))
    labels = rng.integers(0, 3, size=5)
    _, cache = forward(model, x)
    grads = backward(model, cache, labels)

    eps = 1e-5
    for name, tensor in model.tensors().items():
        flat = tensor.ravel()
        g_flat = grads[name].ravel()
        for k in rng.choice(flat.size, size=min(10, flat.size), replace=False):
            orig = flat[k]
            flat[k] = orig + eps
            lp, _ = softmax_cross_entropy(forward(model, x)[0], labels)
            flat[k] = orig - eps
            lm, _ = softmax_cross_entropy(forward(model, x)[0], labels)
            flat[k] = orig
            fd = (lp - lm) / (2 * eps)
            assert g_flat[k] == pytest.approx(fd, abs=1e-4)


def test_backward_duplicated_batch_is_invariant():
    # mean reduction: stacking the batch with itself changes nothing
    rng = np.random.default_rng(9)
    model = init_mlp(rng, sizes=(6, 4, 3))
    x = rng.standard_normal((4, 6))
    labels = rng.integers(0, 3, size=4)
    _, cache1 = forward(model, x)
    g1 = backward(model, cache1, labels)
    _, cache2 = forward(model, np.vstack([x, x]))
    g2 = backward(model, cache2, np.concatenate([labels, labels]))
    for name in g1:
        assert np.allclose(g1[name], g2[name], atol=1e-12)


def test_init_bounds_and_seeding():
    model = init_mlp(0)
    s1 = 1.0 / math.sqrt(784)
    s2 = 1.0 / math.sqrt(10)
    assert np.all(np.abs(model.W1) <= s1)
    assert np.all(np.abs(model.b1) <= s1)
    assert np.all(np.abs(model.W2) <= s2)
    assert np.all(np.abs(model.b2) <= s2)
    again = init_mlp(0)
    assert np.array_equal(model.W1, again.W1)
    assert not np.array_equal(model.W1, init_mlp(1).W1)
    # passing a generator matches passing its seed
    from_gen = init_mlp(np.random.default_rng(0))
    assert np.array_equal(model.W2, from_gen.W2)


def test_init_loss_is_near_uniform():
    rng = np.random.default_rng(10)
    model = init_mlp(0)
    x = rng.integers(0, 256, size=(64, 784)).astype(float) / 255.0
    labels = rng.integers(0, 10, size=64)
    loss, _ = softmax_cross_entropy(forward(model, x)[0], labels)
    assert loss == pytest.approx(math.log(10.0), abs=0.1)


def test_init_rejects_unknown_activation():
    with pytest.raises(ConfigError):
        init_mlp(0, activation="gelu")


# --- training loop -------------------------------------------------------


def _tiny_dataset(n=12, seed=0):
    rng = np.random.default_rng(seed)
    return Dataset(
        images=rng.integers(0, 256, size=(n, 28, 28), dtype=np.uint8),
        labels=rng.integers(0, 10, size=n).astype(np.int64),
    )


def test_train_zero_epochs_returns_initial_model():
    ds = _tiny_dataset()
    model, traj = train(
        ds, default_config("sgd", 0.1), epochs=0, seed=5, batch_size=4
    )
    assert len(traj) == 0
    assert not traj.diverged
    reference = init_mlp(np.random.default_rng(5))
    for name, tensor in model.tensors().items():
        assert np.array_equal(tensor, reference.tensors()[name])


def test_train_step_count_and_order():
    ds = _tiny_dataset(n=10)
    model, traj = train(
        ds, default_config("ma1", 0.01), epochs=2, seed=1, batch_size=4
    )
    # ceil(10 / 4) = 3 batches per epoch, the last one partial
    assert len(traj) == 6
    assert [r.t for r in traj.records] == list(range(6))
    assert all(np.isfinite(r.loss) for r in traj.records)
    assert all(r.params[0] > 0 for r in traj.records)


def test_train_is_deterministic_per_seed():
    ds = _tiny_dataset()
    cfg = default_config("ar1", 0.05)
    m1, t1 = train(ds, cfg, epochs=2, seed=3, batch_size=4)
    m2, t2 = train(ds, cfg, epochs=2, seed=3, batch_size=4)
    for name in m1.tensors():
        assert np.array_equal(m1.tensors()[name], m2.tensors()[name])
    assert [r.loss for r in t1.records] == [r.loss for r in t2.records]
    m3, _ = train(ds, cfg, epochs=2, seed=4, batch_size=4)
    assert not np.array_equal(m1.W1, m3.W1)


def test_train_augment_toggle_changes_stream():
    ds = _tiny_dataset()
    cfg = default_config("sgd", 0.05)
    m_aug, _ = train(ds, cfg, epochs=1, seed=3, batch_size=4, augment=True)
    m_raw, _ = train(ds, cfg, epochs=1, seed=3, batch_size=4, augment=False)
    assert not np.array_equal(m_aug.W1, m_raw.W1)


def test_train_records_epoch_accuracy():
    ds = _tiny_dataset()
    holdout = _tiny_dataset(n=8, seed=7)
    _, traj = train(
        ds,
        default_config("sgd", 0.05),
        epochs=3,
        seed=0,
        batch_size=4,
        test_set=holdout,
    )
    assert len(traj.epoch_accuracy) == 3
    assert all(0.0 <= a <= 1.0 for a in traj.epoch_accuracy)


def test_train_validation():
    ds = _tiny_dataset()
    with pytest.raises(ConfigError):
        train(ds, default_config("sgd", 0.1), epochs=-1, batch_size=4)
    with pytest.raises(ConfigError):
        train(ds, default_config("sgd", 0.1), epochs=1, batch_size=0)


def test_train_flags_divergence():
    ds = _tiny_dataset()
    with np.errstate(over="ignore", invalid="ignore", divide="ignore"):
        _, traj = train(
            ds, default_config("sgd", 1e18), epochs=5, seed=0, batch_size=4
        )
    assert traj.diverged


# --- evaluation ----------------------------------------------------------


def test_evaluate_zero_model_predicts_class_zero():
    model = _zero_model(n_in=784, n_hidden=3)
    ds = _tiny_dataset()
    expected = float(np.mean(ds.labels == 0))
    assert evaluate(model, ds) == expected


def test_evaluate_perfect_picker():
    # image k lights exactly pixel (0, k); a hand-built linear model reads
    # it back out, so accuracy is 1
    images = np.zeros((10, 28, 28), dtype=np.uint8)
    for k in range(10):
        images[k, 0, k] = 255
    ds = Dataset(images=images, labels=np.arange(10, dtype=np.int64))
    W1 = np.zeros((784, 10))
    for k in range(10):
        W1[k, k] = 1.0
    model = MLPModel(
        W1=W1, b1=np.zeros(10), W2=np.eye(10), b2=np.zeros(10),
        activation="relu",
    )
    assert evaluate(model, ds) == 1.0


def test_evaluate_b2_shift_invariance():
    ds = _tiny_dataset(n=30)
    model = init_mlp(2)
    base = evaluate(model, ds)
    model.b2 = model.b2 + 7.5
    assert evaluate(model, ds) == base


def test_evaluate_chunking_is_invisible():
    ds = _tiny_dataset(n=25)
    model = init_mlp(3)
    assert evaluate(model, ds, chunk=4) == evaluate(model, ds, chunk=2000)


def test_evaluate_empty_dataset():
    ds = Dataset(
        images=np.zeros((0, 28, 28), dtype=np.uint8),
        labels=np.zeros(0, dtype=np.int64),
    )
    with pytest.raises(ConfigError):
        evaluate(init_mlp(0), ds)

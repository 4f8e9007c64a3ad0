"""Small fully-connected network with manual backpropagation, plus MNIST
IDX ingestion and the pad-and-crop augmentation.

The architecture is two affine layers with one hidden activation. Layer
sizes are arguments so the gradient check can run the same code path on a
throwaway 12-4-3 network, but the benchmark network is 784-10-10.
"""

from __future__ import annotations

import gzip
import struct
from dataclasses import dataclass

import numpy as np

from .errors import (
    ConfigError,
    DataError,
    DivergenceError,
    IdxDimensionError,
    IdxMagicError,
    IdxTruncatedError,
)
from .optimizers import (
    OptimizerConfig,
    StepRecord,
    Trajectory,
    UpdateEngine,
    lr_decay,
    validate_config,
)

__all__ = [
    "Dataset",
    "load_mnist_idx",
    "augment_pad_crop",
    "MLPModel",
    "init_mlp",
    "forward",
    "softmax_cross_entropy",
    "backward",
    "train",
    "evaluate",
]

_IMAGE_MAGIC = 2051
_LABEL_MAGIC = 2049


@dataclass
class Dataset:
    """Byte images with integer class labels."""

    images: np.ndarray  # (N, 28, 28) uint8
    labels: np.ndarray  # (N,) int

    def __len__(self) -> int:
        return self.images.shape[0]


def _read_idx(path, expected_magic: int):
    """Parse one IDX file (gzip-transparent) into an ndarray of uint8."""
    with open(path, "rb") as raw:
        head = raw.read(2)
    opener = gzip.open if head == b"\x1f\x8b" else open
    with opener(path, "rb") as fh:
        data = fh.read()
    if len(data) < 4:
        raise IdxTruncatedError(f"{path}: too short for an IDX header")
    magic = struct.unpack(">i", data[:4])[0]
    if magic != expected_magic:
        raise IdxMagicError(
            f"{path}: wrong magic {magic}, expected {expected_magic}"
        )
    ndim = magic & 0xFF
    header_end = 4 + 4 * ndim
    if len(data) < header_end:
        raise IdxTruncatedError(f"{path}: header truncated")
    dims = struct.unpack(f">{ndim}i", data[4:header_end])
    count = int(np.prod(dims))
    payload = data[header_end:]
    if len(payload) != count:
        raise IdxTruncatedError(
            f"{path}: payload holds {len(payload)} bytes, header promises "
            f"{count}"
        )
    return np.frombuffer(payload, dtype=np.uint8).reshape(dims)


def load_mnist_idx(images_path, labels_path) -> Dataset:
    """Read an MNIST image/label file pair (plain or .gz).

    Big-endian IDX: magic 2051 for 3-dimensional image tensors, 2049 for
    1-dimensional label vectors. Images must be 28x28 and counts must
    agree between the two files.
    """
    images = _read_idx(images_path, _IMAGE_MAGIC)
    labels = _read_idx(labels_path, _LABEL_MAGIC)
    if images.shape[1:] != (28, 28):
        raise IdxDimensionError(
            f"{images_path}: images are {images.shape[1:]}, expected (28, 28)"
        )
    if images.shape[0] != labels.shape[0]:
        raise IdxDimensionError(
            f"image count {images.shape[0]} != label count {labels.shape[0]}"
        )
    if labels.size and labels.max() > 9:
        raise DataError(f"{labels_path}: label {labels.max()} outside 0..9")
    return Dataset(images=images, labels=labels.astype(np.int64))


def augment_pad_crop(image, rng=None, *, offset=None):
    """Zero-pad a 28x28 image to 32x32 and crop a random 28x28 window.

    There are 25 possible windows; ``offset`` (row, col in 0..4) pins one,
    otherwise ``rng`` draws uniformly. Offset (2, 2) is the centered crop
    and returns the input unchanged.
    """
    img = np.asarray(image)
    if img.shape != (28, 28):
        raise ConfigError(f"expected a 28x28 image, got {img.shape}")
    if offset is None:
        if rng is None:
            raise ConfigError("need an rng when offset is not pinned")
        offset = rng.integers(0, 5, size=2)
    r, c = int(offset[0]), int(offset[1])
    if not (0 <= r <= 4 and 0 <= c <= 4):
        raise ConfigError(f"offset out of range: {(r, c)}")
    padded = np.zeros((32, 32), dtype=img.dtype)
    padded[2:30, 2:30] = img
    return padded[r:r + 28, c:c + 28]


def _augment_batch(images, rng):
    """Pad-and-crop every image with an independent uniform offset.

    One (row, col) draw per sample, in batch order, so a run is
    reproducible from the generator state alone.
    """
    n = images.shape[0]
    offsets = rng.integers(0, 5, size=(n, 2))
    padded = np.zeros((n, 32, 32), dtype=images.dtype)
    padded[:, 2:30, 2:30] = images
    out = np.empty_like(images)
    for i in range(n):
        r, c = offsets[i]
        out[i] = padded[i, r:r + 28, c:c + 28]
    return out


@dataclass
class MLPModel:
    """Two affine layers; the hidden activation is a named knob."""

    W1: np.ndarray
    b1: np.ndarray
    W2: np.ndarray
    b2: np.ndarray
    activation: str = "relu"

    def tensors(self):
        return {"W1": self.W1, "b1": self.b1, "W2": self.W2, "b2": self.b2}


_ACTIVATIONS = ("relu", "tanh", "identity")


def init_mlp(seed=0, sizes=(784, 10, 10), activation="relu") -> MLPModel:
    """Seeded uniform init in [-1/sqrt(fan_in), +1/sqrt(fan_in)] per layer,
    biases included. ``seed`` may be an int or a Generator.
    """
    if activation not in _ACTIVATIONS:
        raise ConfigError(
            f"activation must be one of {_ACTIVATIONS}, got {activation!r}"
        )
    n_in, n_hidden, n_out = sizes
    rng = seed if isinstance(seed, np.random.Generator) else (
        np.random.default_rng(seed)
    )
    s1 = 1.0 / np.sqrt(n_in)
    s2 = 1.0 / np.sqrt(n_hidden)
    return MLPModel(
        W1=rng.uniform(-s1, s1, size=(n_in, n_hidden)),
        b1=rng.uniform(-s1, s1, size=n_hidden),
        W2=rng.uniform(-s2, s2, size=(n_hidden, n_out)),
        b2=rng.uniform(-s2, s2, size=n_out),
        activation=activation,
    )


def _activate(z, kind):
    if kind == "relu":
        return np.maximum(z, 0.0)
    if kind == "tanh":
        return np.tanh(z)
    return z


def _activate_grad(z, h, kind):
    if kind == "relu":
        return (z > 0.0).astype(float)
    if kind == "tanh":
        return 1.0 - h * h
    return np.ones_like(z)


def forward(model: MLPModel, batch):
    """Returns (logits, cache). ``batch`` is (B, n_in), already scaled."""
    x = np.asarray(batch, dtype=float)
    z1 = x @ model.W1 + model.b1
    h = _activate(z1, model.activation)
    logits = h @ model.W2 + model.b2
    cache = {"x": x, "z1": z1, "h": h}
    return logits, cache


def softmax_cross_entropy(logits, labels):
    """Mean cross-entropy of softmax(logits) against integer labels.

    Returns (loss, dloss/dlogits). The gradient is (softmax - onehot)/B,
    already averaged over the batch.
    """
    z = logits - logits.max(axis=1, keepdims=True)
    expz = np.exp(z)
    probs = expz / expz.sum(axis=1, keepdims=True)
    n = logits.shape[0]
    rows = np.arange(n)
    loss = float(-np.mean(np.log(probs[rows, labels])))
    dlogits = probs.copy()
    dlogits[rows, labels] -= 1.0
    dlogits /= n
    return loss, dlogits


def backward(model: MLPModel, cache, labels):
    """Exact gradients of the mean cross-entropy for each tensor."""
    logits = cache["h"] @ model.W2 + model.b2
    _, dlogits = softmax_cross_entropy(logits, labels)
    h, x, z1 = cache["h"], cache["x"], cache["z1"]
    dW2 = h.T @ dlogits
    db2 = dlogits.sum(axis=0)
    dh = dlogits @ model.W2.T
    dz1 = dh * _activate_grad(z1, h, model.activation)
    dW1 = x.T @ dz1
    db1 = dz1.sum(axis=0)
    return {"W1": dW1, "b1": db1, "W2": dW2, "b2": db2}


def _param_norm(model: MLPModel) -> float:
    total = 0.0
    for tensor in model.tensors().values():
        total += float(np.sum(tensor * tensor))
    return float(np.sqrt(total))


def train(
    dataset: Dataset,
    config: OptimizerConfig,
    epochs: int,
    seed=0,
    *,
    batch_size: int,
    test_set: Dataset | None = None,
    augment: bool = True,
) -> tuple[MLPModel, Trajectory]:
    """Mini-batch training with the configured update rule.

    Per epoch: one seeded shuffle, pad-and-crop augmentation per sample
    (when enabled), one optimizer step per batch, then the learning rate
    decays by the configured factor. Each step logs the loss, a global
    parameter norm, and mean squared raw/filtered gradients. When
    ``test_set`` is given, test accuracy is appended after every epoch.
    A non-finite loss or gradient flags the trajectory as diverged and
    stops training instead of raising.
    """
    validate_config(config)
    if epochs < 0:
        raise ConfigError(f"epochs must be >= 0, got {epochs}")
    if batch_size < 1:
        raise ConfigError(f"batch_size must be >= 1, got {batch_size}")
    rng = np.random.default_rng(seed)
    model = init_mlp(rng)
    engine = UpdateEngine(config)
    traj = Trajectory()
    n = len(dataset)
    t = 0
    for epoch in range(epochs):
        lr = lr_decay(epoch, config.lr, config.lr_decay_per_epoch)
        order = rng.permutation(n)
        for lo in range(0, n, batch_size):
            idx = order[lo:lo + batch_size]
            imgs = dataset.images[idx]
            if augment:
                imgs = _augment_batch(imgs, rng)
            x = imgs.reshape(len(idx), -1).astype(float) / 255.0
            labels = dataset.labels[idx]
            logits, cache = forward(model, x)
            loss, _ = softmax_cross_entropy(logits, labels)
            if not np.isfinite(loss):
                traj.diverged = True
                break
            grads = backward(model, cache, labels)
            norm_before = _param_norm(model)
            raw_sq = 0.0
            filt_sq = 0.0
            count = 0
            try:
                for name, tensor in model.tensors().items():
                    g = grads[name]
                    new_tensor, direction = engine.step(name, tensor, g, lr)
                    setattr(model, name, new_tensor)
                    raw_sq += float(np.sum(g * g))
                    filt_sq += float(np.sum(direction * direction))
                    count += g.size
            except DivergenceError:
                traj.diverged = True
                break
            traj.records.append(
                StepRecord(
                    t=t,
                    params=np.array([norm_before]),
                    loss=loss,
                    raw_grad_sq=np.array([raw_sq / count]),
                    filtered_grad_sq=np.array([filt_sq / count]),
                )
            )
            t += 1
        if traj.diverged:
            break
        if test_set is not None:
            traj.epoch_accuracy.append(evaluate(model, test_set))
    return model, traj


def evaluate(model: MLPModel, dataset: Dataset, chunk: int = 2000) -> float:
    """Fraction of correct argmax predictions; no augmentation here."""
    n = len(dataset)
    if n == 0:
        raise ConfigError("cannot evaluate on an empty dataset")
    hits = 0
    for lo in range(0, n, chunk):
        imgs = dataset.images[lo:lo + chunk]
        x = imgs.reshape(imgs.shape[0], -1).astype(float) / 255.0
        logits, _ = forward(model, x)
        hits += int(np.sum(np.argmax(logits, axis=1)
                           == dataset.labels[lo:lo + chunk]))
    return hits / n

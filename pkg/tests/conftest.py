"""Shared fixtures: repo paths, MNIST file locations, tiny IDX builders."""

import gzip
import os
import struct

import numpy as np
import pytest

REPO_ROOT = os.path.dirname(os.path.dirname(os.path.abspath(__file__)))
MNIST_DIR = os.path.join(REPO_ROOT, "data", "mnist")

MNIST_FILES = {
    "train_images": os.path.join(MNIST_DIR, "train-images-idx3-ubyte.gz"),
    "train_labels": os.path.join(MNIST_DIR, "train-labels-idx1-ubyte.gz"),
    "test_images": os.path.join(MNIST_DIR, "t10k-images-idx3-ubyte.gz"),
    "test_labels": os.path.join(MNIST_DIR, "t10k-labels-idx1-ubyte.gz"),
}


@pytest.fixture(scope="session")
def mnist_paths():
    for path in MNIST_FILES.values():
        if not os.path.exists(path):
            pytest.fail(f"expected MNIST file missing: {path}")
    return dict(MNIST_FILES)


def write_idx_images(path, images, magic=2051, compress=False,
                     truncate_by=0):
    """Serialize a (N, H, W) uint8 array as an IDX image file."""
    images = np.asarray(images, dtype=np.uint8)
    n, h, w = images.shape
    payload = struct.pack(">iiii", magic, n, h, w) + images.tobytes()
    if truncate_by:
        payload = payload[:-truncate_by]
    opener = gzip.open if compress else open
    with opener(path, "wb") as fh:
        fh.write(payload)
    return path


def write_idx_labels(path, labels, magic=2049, compress=False):
    labels = np.asarray(labels, dtype=np.uint8)
    payload = struct.pack(">ii", magic, labels.size) + labels.tobytes()
    opener = gzip.open if compress else open
    with opener(path, "wb") as fh:
        fh.write(payload)
    return path


@pytest.fixture()
def tiny_idx_pair(tmp_path):
    """A 12-image synthetic MNIST-format pair on disk (gzipped)."""
    rng = np.random.default_rng(0)
    images = rng.integers(0, 256, size=(12, 28, 28), dtype=np.uint8)
    labels = rng.integers(0, 10, size=12, dtype=np.uint8)
    img_path = write_idx_images(
        str(tmp_path / "imgs.gz"), images, compress=True
    )
    lab_path = write_idx_labels(
        str(tmp_path / "labs.gz"), labels, compress=True
    )
    return img_path, lab_path, images, labels

"""Shared fixtures and builders for the test suite."""

import sys
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent))

from thermocad import FINDING, NORMAL, Dataset, FeatureVector, GrayImage
from thermocad.imgio import write_pgm


def gray(pixels, levels=256, mask=None) -> GrayImage:
    """GrayImage from nested lists, for hand-built fixtures."""
    return GrayImage(np.array(pixels), levels, None if mask is None else np.array(mask))


def random_image(rng, max_side=16, levels=8, masked=False) -> GrayImage:
    """Random small image, optionally with a random non-empty mask."""
    h = int(rng.integers(1, max_side + 1))
    w = int(rng.integers(1, max_side + 1))
    pixels = rng.integers(0, levels, size=(h, w))
    mask = None
    if masked:
        mask = rng.random((h, w)) < 0.7
        if not mask.any():
            mask[rng.integers(0, h), rng.integers(0, w)] = True
    return GrayImage(pixels, levels, mask)


def feature_vector(sample_id, values, label) -> FeatureVector:
    """FeatureVector from a 10-value sequence."""
    v = list(values)
    assert len(v) == 10
    return FeatureVector(
        sample_id, v[0], v[1], v[2], v[3], v[4], v[5], v[6], v[7], v[8], v[9], label
    )


def toy_dataset(points, labels, prefix="s") -> Dataset:
    """Dataset embedding low-dimensional points into the 10-feature layout.

    Remaining feature slots are zero so kernels see exactly the given
    coordinates.
    """
    samples = []
    for i, (point, label) in enumerate(zip(points, labels)):
        padded = list(point) + [0.0] * (10 - len(point))
        samples.append(feature_vector(f"{prefix}{i:03d}", padded, label))
    return Dataset(tuple(samples))


def gaussian_blob_dataset(rng, n_per_class, separation=8.0) -> Dataset:
    """Two well-separated Gaussian clusters in all 10 features."""
    samples = []
    for ci, label in enumerate((NORMAL, FINDING)):
        center = np.full(10, ci * separation)
        for i in range(n_per_class):
            point = rng.normal(center, 1.0)
            samples.append(feature_vector(f"{label}_{i:03d}", point, label))
    return Dataset(tuple(samples))


@pytest.fixture(scope="session")
def synthetic_corpus(tmp_path_factory):
    """On-disk 40-image corpus: 20 smooth gradients vs 20 salt noise.

    Every image is 32x32 with a centered disc ROI mask; gradients are
    labeled normal, noise findings. Returns the corpus directory holding
    images/, masks/ and manifest.csv.
    """
    root = tmp_path_factory.mktemp("corpus")
    images = root / "images"
    masks = root / "masks"
    images.mkdir()
    masks.mkdir()
    rng = np.random.default_rng(20260810)

    side = 32
    yy, xx = np.mgrid[0:side, 0:side]
    disc = (xx - side / 2 + 0.5) ** 2 + (yy - side / 2 + 0.5) ** 2 <= (side * 0.45) ** 2
    manifest_lines = ["id,label"]
    for i in range(20):
        ramp = (((xx + i) % side) * (256 // side)).astype(np.uint8)
        sid = f"grad_{i:02d}"
        write_pgm(ramp, images / f"{sid}.pgm")
        write_pgm(disc.astype(np.uint8) * 255, masks / f"{sid}.pgm")
        manifest_lines.append(f"{sid},{NORMAL}")
    for i in range(20):
        noise = rng.integers(0, 256, size=(side, side)).astype(np.uint8)
        sid = f"noise_{i:02d}"
        write_pgm(noise, images / f"{sid}.pgm")
        write_pgm(disc.astype(np.uint8) * 255, masks / f"{sid}.pgm")
        manifest_lines.append(f"{sid},{FINDING}")
    (root / "manifest.csv").write_text("\n".join(manifest_lines) + "\n")
    return root

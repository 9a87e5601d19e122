"""Gradient-plane and HOG feature extraction for digit images.

Two extractors are provided:

* ``extract_gradient_features``: Sobel gradients of the binarized image,
  decomposed onto 8 directions spaced 45 degrees apart, summed over an
  N x N grid of blocks (8 * N**2 values).
* ``extract_hog``: standard histogram of oriented gradients with 2x2-cell
  blocks and 9 unsigned orientation bins (1296 values on 28x28 images with
  4-pixel cells).
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, TextIO

import numpy as np

# Correlation kernels; taps outside the image read 0.
SOBEL_X = np.array([[1, 2, 1],
                    [0, 0, 0],
                    [-1, -2, -1]], dtype=np.float64)
SOBEL_Y = np.array([[1, 0, -1],
                    [2, 0, -2],
                    [1, 0, -1]], dtype=np.float64)

N_DIRECTIONS = 8
_SIN45 = np.sin(np.pi / 4)


class FeatureConfigError(ValueError):
    pass


@dataclass(frozen=True)
class GradientConfig:
    n_blocks: int = 4
    binarize_threshold: int = 128

    def __post_init__(self):
        if self.n_blocks < 1:
            raise FeatureConfigError("n_blocks must be >= 1")
        if not 0 <= self.binarize_threshold <= 255:
            raise FeatureConfigError("binarize_threshold must lie in [0, 255]")

    @classmethod
    def for_image_size(cls, side: int, **kw) -> "GradientConfig":
        """Default grid: 4 blocks per axis on 16x16 images, 7 on 28x28."""
        defaults = {16: 4, 28: 7}
        return cls(n_blocks=defaults.get(side, 4), **kw)


@dataclass(frozen=True)
class HogConfig:
    cell_size: int = 4
    block_cells: int = 2
    bins: int = 9
    stride_cells: int = 1
    norm_epsilon: float = 1e-6

    def __post_init__(self):
        if (self.block_cells, self.bins, self.stride_cells) != (2, 9, 1):
            raise FeatureConfigError("block_cells=2, bins=9, stride_cells=1 are fixed")
        if self.cell_size < 1 or self.norm_epsilon <= 0:
            raise FeatureConfigError("cell_size must be >= 1 and norm_epsilon > 0")

    def output_length(self, height: int, width: int) -> int:
        cy, cx = height // self.cell_size, width // self.cell_size
        return (cx - 1) * (cy - 1) * self.block_cells ** 2 * self.bins


def gradient_feature_length(n_blocks: int) -> int:
    return N_DIRECTIONS * n_blocks ** 2


# --------------------------------------------------------------------------
# gradient planes

def binarize(image: np.ndarray, threshold: int = 128) -> np.ndarray:
    return (np.asarray(image) >= threshold).astype(np.uint8)


def correlate3x3(image: np.ndarray, kernel: np.ndarray) -> np.ndarray:
    """3x3 correlation with zero padding, same output size as ``image``."""
    img = np.asarray(image, dtype=np.float64)
    h, w = img.shape
    padded = np.zeros((h + 2, w + 2))
    padded[1:-1, 1:-1] = img
    out = np.zeros((h, w))
    for a in range(3):
        for b in range(3):
            if kernel[a, b]:
                out += kernel[a, b] * padded[a:a + h, b:b + w]
    return out


def sobel_gradients(binary: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    binary = np.asarray(binary)
    if binary.ndim != 2 or min(binary.shape) < 3:
        raise FeatureConfigError(f"image must be at least 3x3, got {binary.shape}")
    return correlate3x3(binary, SOBEL_X), correlate3x3(binary, SOBEL_Y)


def magnitude_phase(gx: np.ndarray, gy: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Gradient magnitude and full-quadrant phase in degrees, range [0, 360).

    A zero vector gets phase 0.
    """
    gx = np.asarray(gx, dtype=np.float64)
    gy = np.asarray(gy, dtype=np.float64)
    if gx.shape != gy.shape:
        raise FeatureConfigError("gradient planes differ in shape")
    mag = np.hypot(gx, gy)
    phase = np.degrees(np.arctan2(gy, gx))
    phase = np.where(phase < 0, phase + 360.0, phase)
    phase = np.where(phase >= 360.0, phase - 360.0, phase)
    phase = np.where(mag == 0, 0.0, phase)
    return mag, phase


def decompose_to_planes(mag: np.ndarray, phase: np.ndarray) -> np.ndarray:
    """Split each gradient vector onto its two neighbouring 45-degree directions.

    Returns an array of shape ``(8, *mag.shape)``; plane k holds the
    (non-negative) component along direction ``45 * k`` degrees.
    """
    mag = np.asarray(mag, dtype=np.float64)
    phase = np.asarray(phase, dtype=np.float64)
    if mag.shape != phase.shape:
        raise FeatureConfigError("magnitude and phase planes differ in shape")
    low = np.floor(phase / 45.0).astype(np.int64) % N_DIRECTIONS
    theta = np.radians(phase - 45.0 * np.floor(phase / 45.0))
    a = mag * np.sin(np.pi / 4 - theta) / _SIN45
    b = mag * np.sin(theta) / _SIN45
    # round-off can push a component a hair below zero at the direction boundaries
    a = np.maximum(a, 0.0)
    b = np.maximum(b, 0.0)

    planes = np.zeros((N_DIRECTIONS,) + mag.shape)
    rows, cols = np.indices(mag.shape)
    planes[low, rows, cols] += a
    planes[(low + 1) % N_DIRECTIONS, rows, cols] += b
    return planes


def direction_unit(k: int) -> np.ndarray:
    angle = np.radians(45.0 * k)
    return np.array([np.cos(angle), np.sin(angle)])


def pool_blocks(planes: np.ndarray, n_blocks: int) -> np.ndarray:
    """Sum each plane over an ``n_blocks x n_blocks`` grid.

    Output is block-major (blocks in row-major order) with the 8 plane sums
    of a block stored consecutively.
    """
    planes = np.asarray(planes, dtype=np.float64)
    n_planes, h, w = planes.shape
    if n_blocks < 1 or h % n_blocks or w % n_blocks:
        raise FeatureConfigError(f"{h}x{w} planes are not divisible into {n_blocks}x{n_blocks} blocks")
    bh, bw = h // n_blocks, w // n_blocks
    sums = planes.reshape(n_planes, n_blocks, bh, n_blocks, bw).sum(axis=(2, 4))
    return sums.transpose(1, 2, 0).reshape(-1)


def extract_gradient_features(image: np.ndarray, config: GradientConfig = GradientConfig()) -> np.ndarray:
    image = np.asarray(image)
    h, w = image.shape
    if h % config.n_blocks or w % config.n_blocks:
        raise FeatureConfigError(f"{h}x{w} image is not divisible into {config.n_blocks}x{config.n_blocks} blocks")
    gx, gy = sobel_gradients(binarize(image, config.binarize_threshold))
    planes = decompose_to_planes(*magnitude_phase(gx, gy))
    return pool_blocks(planes, config.n_blocks)


# --------------------------------------------------------------------------
# HOG

def _centered_differences(image: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    # [-1, 0, 1] along each axis with edge replication, so flat regions
    # (including the border) have zero gradient
    p = np.pad(np.asarray(image, dtype=np.float64), 1, mode="edge")
    gx = p[1:-1, 2:] - p[1:-1, :-2]
    gy = p[2:, 1:-1] - p[:-2, 1:-1]
    return gx, gy


def cell_histograms(image: np.ndarray, config: HogConfig = HogConfig()) -> np.ndarray:
    """Orientation histograms per cell, shape ``(cells_y, cells_x, bins)``.

    Unsigned orientation in [0, 180) with bin centres at ``k * 180 / bins``
    degrees, so bin 0 holds 0/180-degree gradients. Each pixel's magnitude is
    split linearly between the two nearest centres (wrapping at 180).
    """
    gx, gy = _centered_differences(image)
    mag = np.hypot(gx, gy)
    angle = np.degrees(np.arctan2(gy, gx)) % 180.0

    bin_width = 180.0 / config.bins
    pos = angle / bin_width
    lo = np.floor(pos)
    frac = pos - lo
    lo = lo.astype(np.int64) % config.bins
    hi = (lo + 1) % config.bins

    cs = config.cell_size
    cy, cx = mag.shape[0] // cs, mag.shape[1] // cs
    hist = np.zeros((cy, cx, config.bins))
    # pixels beyond the last whole cell are ignored
    m = mag[:cy * cs, :cx * cs]
    rows, cols = np.indices(m.shape)
    cell_r, cell_c = rows // cs, cols // cs
    np.add.at(hist, (cell_r, cell_c, lo[:cy * cs, :cx * cs]), m * (1.0 - frac[:cy * cs, :cx * cs]))
    np.add.at(hist, (cell_r, cell_c, hi[:cy * cs, :cx * cs]), m * frac[:cy * cs, :cx * cs])
    return hist


def extract_hog(image: np.ndarray, config: HogConfig = HogConfig()) -> np.ndarray:
    image = np.asarray(image)
    cy, cx = image.shape[0] // config.cell_size, image.shape[1] // config.cell_size
    if cy < config.block_cells or cx < config.block_cells:
        raise FeatureConfigError(f"{image.shape} image is too small for one {config.block_cells}x{config.block_cells}-cell block")
    hist = cell_histograms(image, config)
    bc = config.block_cells
    blocks = np.stack([
        np.stack([hist[y:y + bc, x:x + bc].reshape(-1) for x in range(0, cx - bc + 1, config.stride_cells)])
        for y in range(0, cy - bc + 1, config.stride_cells)
    ])
    norms = np.sqrt((blocks ** 2).sum(axis=-1, keepdims=True) + config.norm_epsilon ** 2)
    return (blocks / norms).reshape(-1)


# --------------------------------------------------------------------------

def extract_all(images: Iterable[np.ndarray], extractor, config) -> np.ndarray:
    """Stack ``extractor(image, config)`` over images into an (n, d) array."""
    rows = [extractor(img, config) for img in images]
    if not rows:
        return np.zeros((0, 0))
    return np.vstack(rows)


def write_feature_csv(features: np.ndarray, labels: np.ndarray, stream: TextIO) -> None:
    """One ``label,f0,f1,...`` line per row; floats use repr for exact round trip."""
    for label, row in zip(labels, features):
        stream.write(f"{int(label)}," + ",".join(repr(float(v)) for v in row) + "\n")


def read_feature_csv(stream: TextIO) -> tuple[np.ndarray, np.ndarray]:
    labels, rows = [], []
    for line in stream:
        line = line.strip()
        if not line:
            continue
        label, *values = line.split(",")
        labels.append(int(label))
        rows.append([float(v) for v in values])
    return np.array(rows, dtype=np.float64), np.array(labels, dtype=np.int64)

"""Digit dataset containers, IDX/CSV loaders and per-class splits."""

from __future__ import annotations

import gzip
import io
import struct
from dataclasses import dataclass
from pathlib import Path
from typing import BinaryIO, Iterator, TextIO

import numpy as np

IDX_IMAGE_MAGIC = 0x00000803
IDX_LABEL_MAGIC = 0x00000801


class FormatError(ValueError):
    """Malformed IDX or CSV input."""


class SplitError(ValueError):
    """A class has too few instances for the requested split."""


@dataclass(frozen=True)
class LabeledImage:
    pixels: np.ndarray  # (height, width) uint8
    label: int

    @property
    def height(self) -> int:
        return self.pixels.shape[0]

    @property
    def width(self) -> int:
        return self.pixels.shape[1]


@dataclass(frozen=True, eq=False)
class Dataset:
    """Images stacked as an ``(n, height, width)`` uint8 array plus labels.

    Arrays are made read-only on construction so a Dataset can be shared
    between readers without copying.
    """

    images: np.ndarray
    labels: np.ndarray
    class_count: int = 10

    def __post_init__(self):
        images = np.asarray(self.images)
        labels = np.asarray(self.labels)
        if images.ndim != 3:
            raise FormatError(f"images must be (n, height, width), got shape {images.shape}")
        if labels.shape != (images.shape[0],):
            raise FormatError(f"{labels.shape[0]} labels for {images.shape[0]} images")
        if self.class_count < 2:
            raise ValueError("class_count must be >= 2")
        if images.size and (images.min() < 0 or images.max() > 255):
            raise FormatError("pixel values must lie in [0, 255]")
        if labels.size and (labels.min() < 0 or labels.max() >= self.class_count):
            raise FormatError(f"labels must lie in [0, {self.class_count})")
        images = images.astype(np.uint8)
        labels = labels.astype(np.int64)
        images.flags.writeable = False
        labels.flags.writeable = False
        object.__setattr__(self, "images", images)
        object.__setattr__(self, "labels", labels)

    @classmethod
    def empty(cls, width: int, height: int, class_count: int = 10) -> "Dataset":
        return cls(np.zeros((0, height, width), np.uint8), np.zeros(0, np.int64), class_count)

    @property
    def width(self) -> int:
        return self.images.shape[2]

    @property
    def height(self) -> int:
        return self.images.shape[1]

    def __len__(self) -> int:
        return self.images.shape[0]

    def __getitem__(self, i: int) -> LabeledImage:
        return LabeledImage(self.images[i], int(self.labels[i]))

    def __iter__(self) -> Iterator[LabeledImage]:
        for i in range(len(self)):
            yield self[i]

    def __eq__(self, other) -> bool:
        if not isinstance(other, Dataset):
            return NotImplemented
        return (
            self.class_count == other.class_count
            and self.images.shape == other.images.shape
            and np.array_equal(self.images, other.images)
            and np.array_equal(self.labels, other.labels)
        )

    def class_counts(self) -> np.ndarray:
        return np.bincount(self.labels, minlength=self.class_count)


@dataclass(frozen=True)
class SplitSpec:
    train_per_class: int
    test_per_class: int

    def __post_init__(self):
        if self.train_per_class <= 0 or self.test_per_class < 0:
            raise ValueError("train_per_class must be > 0 and test_per_class >= 0")


# --------------------------------------------------------------------------
# IDX

def _read_exact(stream: BinaryIO, n: int, what: str) -> bytes:
    data = stream.read(n)
    if len(data) != n:
        raise FormatError(f"truncated IDX stream: expected {n} bytes of {what}, got {len(data)}")
    return data


def _read_header(stream: BinaryIO, magic: int, n_dims: int) -> tuple[int, ...]:
    head = _read_exact(stream, 4 * (1 + n_dims), "header")
    values = struct.unpack(f">{1 + n_dims}I", head)
    if values[0] != magic:
        raise FormatError(f"bad IDX magic 0x{values[0]:08x}, expected 0x{magic:08x}")
    return values[1:]


def load_idx_images(stream: BinaryIO) -> np.ndarray:
    """Read an IDX3 image stream into a ``(count, rows, cols)`` uint8 array."""
    count, rows, cols = _read_header(stream, IDX_IMAGE_MAGIC, 3)
    body = _read_exact(stream, count * rows * cols, "pixels")
    return np.frombuffer(body, dtype=np.uint8).reshape(count, rows, cols).copy()


def load_idx_labels(stream: BinaryIO) -> np.ndarray:
    (count,) = _read_header(stream, IDX_LABEL_MAGIC, 1)
    body = _read_exact(stream, count, "labels")
    return np.frombuffer(body, dtype=np.uint8).astype(np.int64)


def encode_idx_images(images: np.ndarray) -> bytes:
    images = np.asarray(images, dtype=np.uint8)
    count, rows, cols = images.shape
    return struct.pack(">4I", IDX_IMAGE_MAGIC, count, rows, cols) + images.tobytes()


def encode_idx_labels(labels: np.ndarray) -> bytes:
    labels = np.asarray(labels)
    if labels.size and (labels.min() < 0 or labels.max() > 255):
        raise FormatError("IDX labels must fit in one unsigned byte")
    return struct.pack(">2I", IDX_LABEL_MAGIC, labels.shape[0]) + labels.astype(np.uint8).tobytes()


def open_binary(path: str | Path) -> BinaryIO:
    """Open ``path`` for reading, decompressing transparently if it ends in .gz."""
    path = Path(path)
    if path.suffix == ".gz":
        return gzip.open(path, "rb")
    return open(path, "rb")


def load_idx_dataset(images_path: str | Path, labels_path: str | Path,
                     class_count: int = 10) -> Dataset:
    with open_binary(images_path) as f:
        images = load_idx_images(f)
    with open_binary(labels_path) as f:
        labels = load_idx_labels(f)
    if len(images) != len(labels):
        raise FormatError(f"{len(images)} images but {len(labels)} labels")
    return Dataset(images, labels, class_count)


# --------------------------------------------------------------------------
# CSV carrier: ``label,p0,p1,...`` one image per line, no header

def load_csv(stream: TextIO, width: int, height: int, class_count: int = 10) -> Dataset:
    n_fields = 1 + width * height
    rows = []
    for lineno, line in enumerate(stream, start=1):
        line = line.strip()
        if not line:
            continue
        tokens = line.split(",")
        if len(tokens) != n_fields:
            raise FormatError(f"line {lineno}: expected {n_fields} fields, got {len(tokens)}")
        try:
            values = [int(t) for t in tokens]
        except ValueError as exc:
            raise FormatError(f"line {lineno}: non-integer token") from exc
        if any(v < 0 or v > 255 for v in values[1:]):
            raise FormatError(f"line {lineno}: pixel outside [0, 255]")
        rows.append(values)
    if not rows:
        return Dataset.empty(width, height, class_count)
    arr = np.array(rows, dtype=np.int64)
    if arr[:, 0].min() < 0 or arr[:, 0].max() >= class_count:
        raise FormatError(f"labels must lie in [0, {class_count})")
    return Dataset(arr[:, 1:].reshape(-1, height, width), arr[:, 0], class_count)


def write_csv(dataset: Dataset, stream: TextIO) -> None:
    flat = dataset.images.reshape(len(dataset), dataset.width * dataset.height)
    for label, pixels in zip(dataset.labels, flat):
        stream.write(f"{label}," + ",".join(map(str, pixels.tolist())) + "\n")


def dumps_csv(dataset: Dataset) -> str:
    buf = io.StringIO()
    write_csv(dataset, buf)
    return buf.getvalue()


# --------------------------------------------------------------------------

def take_split(dataset: Dataset, spec: SplitSpec) -> tuple[Dataset, Dataset]:
    """First ``train_per_class`` instances of every class for training, the
    next ``test_per_class`` for testing.

    Instances are picked in file order within each class; the outputs keep
    dataset order.
    """
    need = spec.train_per_class + spec.test_per_class
    train_idx, test_idx = [], []
    for c in range(dataset.class_count):
        members = np.flatnonzero(dataset.labels == c)
        if len(members) < need:
            raise SplitError(f"class {c} has {len(members)} instances, split needs {need}")
        train_idx.append(members[:spec.train_per_class])
        test_idx.append(members[spec.train_per_class:need])
    train_idx = np.sort(np.concatenate(train_idx))
    test_idx = np.sort(np.concatenate(test_idx))
    pick = lambda idx: Dataset(dataset.images[idx], dataset.labels[idx], dataset.class_count)
    return pick(train_idx), pick(test_idx)

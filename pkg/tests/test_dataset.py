import gzip
import io
import struct
from pathlib import Path

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from knnsvm.dataset import (
    Dataset, FormatError, SplitError, SplitSpec, dumps_csv, encode_idx_images, encode_idx_labels,
    load_csv, load_idx_dataset, load_idx_images, load_idx_labels, take_split,
)

DATA = Path(__file__).parent / "data"
MNIST_IMAGES = DATA / "mnist-train-7989-images.idx3-ubyte.gz"
MNIST_LABELS = DATA / "mnist-train-7989-labels.idx1-ubyte.gz"


def idx_images(count, rows, cols, body=b""):
    return io.BytesIO(struct.pack(">4I", 0x803, count, rows, cols) + bytes(body))


def test_idx_zero_count():
    assert load_idx_images(idx_images(0, 28, 28)).shape == (0, 28, 28)


def test_idx_single_image_passthrough():
    imgs = load_idx_images(idx_images(1, 2, 2, [0, 255, 7, 9]))
    assert imgs.shape == (1, 2, 2)
    assert imgs.reshape(-1).tolist() == [0, 255, 7, 9]


def test_idx_bad_magic():
    with pytest.raises(FormatError, match="magic"):
        load_idx_images(io.BytesIO(struct.pack(">4I", 0x801, 1, 2, 2) + bytes(4)))
    with pytest.raises(FormatError, match="magic"):
        load_idx_labels(io.BytesIO(struct.pack(">2I", 0x803, 0)))


@pytest.mark.parametrize("stream", [
    io.BytesIO(struct.pack(">4I", 0x803, 2, 2, 2) + bytes(7)),
    io.BytesIO(struct.pack(">2I", 0x803, 2)),
])
def test_idx_truncated(stream):
    with pytest.raises(FormatError, match="truncated"):
        load_idx_images(stream)


def test_idx_labels():
    assert load_idx_labels(io.BytesIO(struct.pack(">2I", 0x801, 3) + bytes([0, 9, 5]))).tolist() == [0, 9, 5]
    assert load_idx_labels(io.BytesIO(struct.pack(">2I", 0x801, 0))).tolist() == []
    with pytest.raises(FormatError):
        load_idx_labels(io.BytesIO(struct.pack(">2I", 0x801, 3) + bytes([1])))


def test_label_out_of_range_rejected_by_dataset():
    with pytest.raises(FormatError):
        Dataset(np.zeros((1, 2, 2)), np.array([10]), class_count=10)


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 5), st.integers(1, 6), st.integers(1, 6), st.data())
def test_idx_round_trip_is_byte_exact(count, rows, cols, data):
    body = data.draw(st.binary(min_size=count * rows * cols, max_size=count * rows * cols))
    raw = struct.pack(">4I", 0x803, count, rows, cols) + body
    assert encode_idx_images(load_idx_images(io.BytesIO(raw))) == raw
    labels = data.draw(st.binary(min_size=count, max_size=count))
    raw_l = struct.pack(">2I", 0x801, count) + labels
    assert encode_idx_labels(load_idx_labels(io.BytesIO(raw_l))) == raw_l


def test_csv_basic():
    ds = load_csv(io.StringIO("3,0,0,0,0\n"), 2, 2)
    assert len(ds) == 1 and ds[0].label == 3 and ds[0].width == 2 and ds[0].height == 2


def test_csv_empty():
    ds = load_csv(io.StringIO(""), 2, 2)
    assert len(ds) == 0


@pytest.mark.parametrize("text", ["3,0,0,0\n", "3,0,0,x,0\n", "3,0,0,256,0\n", "3,0,0,-1,0\n"])
def test_csv_errors(text):
    with pytest.raises(FormatError):
        load_csv(io.StringIO(text), 2, 2)


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 6), st.integers(1, 5), st.integers(1, 5), st.integers(2, 12), st.data())
def test_csv_round_trip(n, h, w, classes, data):
    pixels = np.array(data.draw(st.lists(st.integers(0, 255), min_size=n * h * w, max_size=n * h * w)),
                      dtype=np.uint8).reshape(n, h, w)
    labels = np.array(data.draw(st.lists(st.integers(0, classes - 1), min_size=n, max_size=n)), dtype=np.int64)
    ds = Dataset(pixels, labels, classes)
    assert load_csv(io.StringIO(dumps_csv(ds)), w, h, classes) == ds


def _toy(per_class, classes=3):
    labels = np.tile(np.arange(classes), per_class)
    images = np.arange(len(labels) * 4).reshape(-1, 2, 2) % 256
    return Dataset(images, labels, classes)


def test_split_first_instances_per_class():
    ds = _toy(5)
    train, test = take_split(ds, SplitSpec(2, 1))
    assert train.class_counts().tolist() == [2, 2, 2]
    assert test.class_counts().tolist() == [1, 1, 1]
    # labels cycle 0,1,2 so class c's k-th member sits at row 3k + c
    assert np.array_equal(train.images, ds.images[:6])
    assert np.array_equal(test.images, ds.images[6:9])


def test_split_deterministic_and_disjoint():
    ds = _toy(7)
    a = take_split(ds, SplitSpec(3, 2))
    b = take_split(ds, SplitSpec(3, 2))
    assert a[0] == b[0] and a[1] == b[1]
    # pixel blocks are unique per row, so they identify instances
    seen = [img.tobytes() for part in a for img in part.images]
    assert len(seen) == len(set(seen)) == 15


def test_split_train_only():
    train, test = take_split(_toy(3, classes=2), SplitSpec(1, 0))
    assert train.class_counts().tolist() == [1, 1]
    assert len(test) == 0


def test_split_insufficient_names_class():
    labels = np.array([0, 0, 0, 1])
    ds = Dataset(np.zeros((4, 2, 2)), labels, 2)
    with pytest.raises(SplitError, match="class 1"):
        take_split(ds, SplitSpec(1, 1))


def test_split_usps_sized():
    ds = Dataset(np.zeros((11000, 1, 1)), np.repeat(np.arange(10), 1100), 10)
    train, test = take_split(ds, SplitSpec(900, 200))
    assert (len(train), len(test)) == (9000, 2000)


def test_dataset_is_read_only():
    ds = _toy(2)
    with pytest.raises(ValueError):
        ds.images[0, 0, 0] = 1


def test_mnist_prefix_fixture_and_split():
    ds = load_idx_dataset(MNIST_IMAGES, MNIST_LABELS)
    assert ds.images.shape == (7989, 28, 28)
    assert ds.labels[:10].tolist() == [5, 0, 4, 1, 9, 2, 1, 3, 1, 4]
    train, test = take_split(ds, SplitSpec(600, 100))
    assert (len(train), len(test)) == (6000, 1000)


def test_gzip_and_plain_load_agree(tmp_path):
    with gzip.open(MNIST_LABELS, "rb") as f:
        raw = f.read()
    plain = tmp_path / "labels.idx1-ubyte"
    plain.write_bytes(raw)
    with open(plain, "rb") as f:
        assert np.array_equal(load_idx_labels(f), load_idx_labels(io.BytesIO(raw)))

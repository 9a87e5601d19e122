"""Exact brute-force distances and nearest-neighbour queries."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.spatial.distance import cdist

METRICS = ("euclidean", "cosine")


@dataclass(frozen=True)
class NeighborList:
    indices: np.ndarray
    distances: np.ndarray


def _check_pair(test: np.ndarray, train: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    test = np.atleast_2d(np.asarray(test, dtype=np.float64))
    train = np.atleast_2d(np.asarray(train, dtype=np.float64))
    if test.shape[1] != train.shape[1]:
        raise ValueError(f"dimension mismatch: {test.shape[1]} vs {train.shape[1]}")
    return test, train


def squared_euclidean(test: np.ndarray, train: np.ndarray) -> np.ndarray:
    """S x R matrix of squared Euclidean distances.

    Differences are formed explicitly (no ``|a|^2 + |b|^2 - 2ab`` expansion)
    so identical vectors are exactly 0 apart.
    """
    test, train = _check_pair(test, train)
    return cdist(test, train, "sqeuclidean")


def cosine_distances(test: np.ndarray, train: np.ndarray) -> np.ndarray:
    """``1 - cos`` between rows; a zero vector is 1 from anything but another zero vector."""
    test, train = _check_pair(test, train)
    na = np.linalg.norm(test, axis=1)
    nb = np.linalg.norm(train, axis=1)
    safe_a = np.where(na > 0, na, 1.0)
    safe_b = np.where(nb > 0, nb, 1.0)
    sim = (test / safe_a[:, None]) @ (train / safe_b[:, None]).T
    d = 1.0 - np.clip(sim, -1.0, 1.0)
    za, zb = na == 0, nb == 0
    d[za, :] = 1.0
    d[:, zb] = 1.0
    d[np.ix_(za, zb)] = 0.0
    return np.maximum(d, 0.0)


def pairwise_distances(test: np.ndarray, train: np.ndarray, metric: str = "euclidean") -> np.ndarray:
    if metric == "euclidean":
        return np.sqrt(squared_euclidean(test, train))
    if metric == "cosine":
        return cosine_distances(test, train)
    raise ValueError(f"unknown metric {metric!r}; expected one of {METRICS}")


def neighbor_order(distances: np.ndarray) -> np.ndarray:
    """Column indices of each row sorted by distance, ties by ascending index."""
    return np.argsort(distances, axis=-1, kind="stable")


def k_nearest(row: np.ndarray, k: int) -> NeighborList:
    row = np.asarray(row, dtype=np.float64)
    if not 1 <= k <= row.shape[0]:
        raise ValueError(f"k={k} out of range [1, {row.shape[0]}]")
    idx = neighbor_order(row)[:k]
    return NeighborList(idx, row[idx])

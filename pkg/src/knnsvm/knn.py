"""Plain majority-vote K-nearest-neighbour prediction."""

from __future__ import annotations

from typing import Sequence


def knn_predict(neighbor_labels: Sequence[int], k: int) -> int:
    """Majority label among the first ``k`` neighbours (given nearest first).

    A vote tie goes to the tied class whose closest member ranks highest.
    """
    if k < 1:
        raise ValueError("k must be >= 1")
    if len(neighbor_labels) < k:
        raise ValueError(f"need at least {k} neighbour labels, got {len(neighbor_labels)}")
    top = [int(v) for v in neighbor_labels[:k]]
    counts: dict[int, int] = {}
    first_rank: dict[int, int] = {}
    for rank, label in enumerate(top):
        counts[label] = counts.get(label, 0) + 1
        first_rank.setdefault(label, rank)
    return min(counts, key=lambda c: (-counts[c], first_rank[c], c))


"""Proximity-gated KNN / per-sample SVM hybrid classifier.

For each test sample the first ``gate_m`` nearest training neighbours are
inspected. If they share one label the sample is "easy" and is classified by
KNN. Otherwise a private one-vs-one SVM is trained on the ``sift_p`` nearest
training samples of *every* class (or, in ``overall`` mode, the ``sift_p``
nearest samples regardless of class) and used to classify that sample alone.
"""

from __future__ import annotations

import logging
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from .knn import knn_predict
from .metrics import METRICS, neighbor_order, squared_euclidean, pairwise_distances
from .svm import SvmTrainConfig, predict_multiclass, rbf_from_squared, train_multiclass_precomputed

log = logging.getLogger(__name__)

SIFT_MODES = ("per_class", "overall")


@dataclass(frozen=True)
class HybridConfig:
    k_votes: int = 1
    gate_m: int = 3
    sift_p: int = 18
    metric: str = "euclidean"
    svm: SvmTrainConfig = SvmTrainConfig()
    sift_mode: str = "per_class"

    def __post_init__(self):
        if min(self.k_votes, self.gate_m, self.sift_p) < 1:
            raise ValueError("k_votes, gate_m and sift_p must all be >= 1")
        if self.metric not in METRICS:
            raise ValueError(f"unknown metric {self.metric!r}")
        if self.sift_mode not in SIFT_MODES:
            raise ValueError(f"unknown sift_mode {self.sift_mode!r}")


@dataclass(frozen=True)
class RouteDecision:
    test_index: int
    route: str  # "knn", "svm" or "fallback"
    gate_class: Optional[int] = None
    sifted_indices: Optional[np.ndarray] = None


@dataclass
class HybridReport:
    predictions: np.ndarray
    true_labels: Optional[np.ndarray]
    routes: list[RouteDecision]
    timings: dict[str, float] = field(default_factory=dict)
    warnings: list[str] = field(default_factory=list)

    @property
    def knn_routed_count(self) -> int:
        return sum(r.route == "knn" for r in self.routes)

    @property
    def svm_routed_count(self) -> int:
        return sum(r.route == "svm" for r in self.routes)

    @property
    def fallback_count(self) -> int:
        return sum(r.route == "fallback" for r in self.routes)

    @property
    def correct(self) -> int:
        if self.true_labels is None:
            raise ValueError("no true labels were supplied")
        return int((self.predictions == self.true_labels).sum())

    @property
    def accuracy(self) -> float:
        return self.correct / len(self.predictions)


def proximity_gate(neighbor_labels: Sequence[int], m: int) -> Optional[int]:
    """The shared label of the first ``m`` neighbours, or None if they differ."""
    if m < 1:
        raise ValueError("m must be >= 1")
    if len(neighbor_labels) < m:
        raise ValueError(f"need at least {m} neighbour labels, got {len(neighbor_labels)}")
    first = int(neighbor_labels[0])
    if all(int(v) == first for v in neighbor_labels[1:m]):
        return first
    return None


def sift_per_class(distance_row: np.ndarray, train_labels: np.ndarray, p: int) -> np.ndarray:
    """Sorted union of the ``p`` nearest training indices of each class.

    A class with fewer than ``p`` members contributes all of them.
    """
    distance_row = np.asarray(distance_row, dtype=np.float64)
    train_labels = np.asarray(train_labels)
    if distance_row.shape[0] == 0:
        raise ValueError("empty training set")
    if p < 1:
        raise ValueError("p must be >= 1")
    order = neighbor_order(distance_row)
    ranked_labels = train_labels[order]
    picked = []
    for c in np.unique(train_labels):
        picked.append(order[ranked_labels == c][:p])
    return np.sort(np.concatenate(picked))


def sift_overall(distance_row: np.ndarray, p: int) -> np.ndarray:
    distance_row = np.asarray(distance_row, dtype=np.float64)
    if not 1 <= p <= distance_row.shape[0]:
        raise ValueError(f"p={p} out of range [1, {distance_row.shape[0]}]")
    return np.sort(neighbor_order(distance_row)[:p])


def _svm_predict_one(train_features, train_labels, sifted, sq_row, svm_config):
    sub = train_features[sifted]
    gram = rbf_from_squared(squared_euclidean(sub, sub), svm_config.gamma)
    gram = (gram + gram.T) / 2
    model = train_multiclass_precomputed(gram, train_labels[sifted], svm_config)
    return predict_multiclass(model, rbf_from_squared(sq_row[sifted], svm_config.gamma))


def hybrid_classify(train_features: np.ndarray, train_labels: np.ndarray, test_features: np.ndarray,
                    config: HybridConfig, test_labels: Optional[np.ndarray] = None,
                    threads: int = 1) -> HybridReport:
    train_features = np.atleast_2d(np.asarray(train_features, dtype=np.float64))
    test_features = np.atleast_2d(np.asarray(test_features, dtype=np.float64))
    train_labels = np.asarray(train_labels, dtype=np.int64)
    if train_labels.shape != (train_features.shape[0],):
        raise ValueError("train labels do not match train features")
    n_train = train_features.shape[0]
    if max(config.gate_m, config.k_votes) > n_train:
        raise ValueError("gate_m and k_votes cannot exceed the training set size")
    if config.sift_mode == "overall" and config.sift_p > n_train:
        raise ValueError("sift_p cannot exceed the training set size in overall mode")
    timings = {}

    t0 = time.perf_counter()
    if config.metric == "euclidean":
        sq = squared_euclidean(test_features, train_features)
        dist = np.sqrt(sq)
    else:
        sq = None
        dist = pairwise_distances(test_features, train_features, config.metric)
    order = neighbor_order(dist)
    timings["distances"] = time.perf_counter() - t0

    t0 = time.perf_counter()
    n_test = test_features.shape[0]
    predictions = np.zeros(n_test, dtype=np.int64)
    routes: list[Optional[RouteDecision]] = [None] * n_test
    hard = []
    depth = max(config.gate_m, config.k_votes)
    for t in range(n_test):
        neighbor_labels = train_labels[order[t, :depth]]
        gate = proximity_gate(neighbor_labels, config.gate_m)
        if gate is None:
            hard.append(t)
        else:
            predictions[t] = knn_predict(neighbor_labels, config.k_votes)
            routes[t] = RouteDecision(t, "knn", gate_class=gate)
    timings["gate_knn"] = time.perf_counter() - t0

    t0 = time.perf_counter()
    warnings = []
    if config.sift_mode == "per_class":
        counts = np.bincount(train_labels)
        short = [c for c in np.unique(train_labels) if counts[c] < config.sift_p]
        if short and hard:
            msg = f"classes {short} have fewer than P={config.sift_p} training samples; sifting takes all of them"
            log.warning(msg)
            warnings.append(msg)

    def solve(t):
        if config.sift_mode == "per_class":
            sifted = sift_per_class(dist[t], train_labels, config.sift_p)
        else:
            sifted = sift_overall(dist[t], config.sift_p)
        if len(np.unique(train_labels[sifted])) < 2:
            label = knn_predict(train_labels[order[t, :config.k_votes]], config.k_votes)
            return label, RouteDecision(t, "fallback", sifted_indices=sifted)
        # the RBF kernel is always on Euclidean distance, whatever the neighbour metric
        sq_row = sq[t] if sq is not None else squared_euclidean(test_features[t], train_features)[0]
        label = _svm_predict_one(train_features, train_labels, sifted, sq_row, config.svm)
        return label, RouteDecision(t, "svm", sifted_indices=sifted)

    if threads > 1 and len(hard) > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            results = list(pool.map(solve, hard))
    else:
        results = [solve(t) for t in hard]
    for t, (label, route) in zip(hard, results):
        predictions[t] = label
        routes[t] = route
    n_fallback = sum(r.route == "fallback" for _, r in results)
    if n_fallback:
        warnings.append(f"{n_fallback} sample(s) had a single-class sift and fell back to KNN")
    timings["svm"] = time.perf_counter() - t0

    true = None if test_labels is None else np.asarray(test_labels, dtype=np.int64)
    return HybridReport(predictions, true, routes, timings, warnings)


def knn_classify(train_features, train_labels, test_features, k: int, metric: str = "euclidean") -> np.ndarray:
    """Plain KNN over every test sample, sharing the hybrid's neighbour ordering."""
    dist = pairwise_distances(test_features, train_features, metric)
    order = neighbor_order(dist)[:, :k]
    labels = np.asarray(train_labels, dtype=np.int64)[order]
    return np.array([knn_predict(row, k) for row in labels], dtype=np.int64)

"""Soft-margin C-SVC on precomputed RBF kernels.

The binary solver is SMO with maximal-violating-pair working set selection
(full scan, no shrinking, no kernel cache). It minimises the dual in the form

    f(a) = 1/2 a' Q a - e' a,   Q_ij = y_i y_j K_ij,
    0 <= a_i <= C,  y' a = 0,

which is the negation of the usual maximisation form ``W(a)``.
Multiclass problems are handled one-vs-one with voting.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Callable, Mapping, Optional

import numpy as np

from .metrics import squared_euclidean

DEFAULT_GAMMA = 2e-4
_TAU = 1e-12  # curvature floor for duplicate points


class DegenerateProblemError(ValueError):
    """Training labels contain a single class."""


@dataclass(frozen=True)
class SvmTrainConfig:
    c_reg: float = 1.0
    gamma: float = DEFAULT_GAMMA
    tol: float = 1e-3
    max_passes: int = 100_000

    def __post_init__(self):
        if self.c_reg <= 0 or self.gamma <= 0 or self.tol <= 0 or self.max_passes <= 0:
            raise ValueError("c_reg, gamma, tol and max_passes must all be positive")


@dataclass(frozen=True)
class BinarySvmModel:
    alphas: np.ndarray
    signed_labels: np.ndarray
    bias: float
    c_reg: float
    converged: bool = True
    iterations: int = 0

    @property
    def support_indices(self) -> np.ndarray:
        return np.flatnonzero(self.alphas > 0)

    @property
    def coef(self) -> np.ndarray:
        return self.alphas * self.signed_labels


@dataclass(frozen=True)
class MulticlassSvmModel:
    classes: tuple[int, ...]
    pair_models: dict[tuple[int, int], BinarySvmModel]
    # rows of the training set that each pair model was fit on
    pair_indices: dict[tuple[int, int], np.ndarray] = field(repr=False)
    n_train: int = 0


# --------------------------------------------------------------------------
# kernels

def rbf_kernel(x: np.ndarray, y: np.ndarray, gamma: float) -> float:
    d = np.asarray(x, dtype=np.float64) - np.asarray(y, dtype=np.float64)
    return float(np.exp(-gamma * np.dot(d, d)))


def rbf_from_squared(sq_dist: np.ndarray, gamma: float) -> np.ndarray:
    return np.exp(-gamma * np.asarray(sq_dist))


def gram_matrix(features: np.ndarray, gamma: float) -> np.ndarray:
    features = np.atleast_2d(np.asarray(features, dtype=np.float64))
    if features.shape[0] == 0:
        raise ValueError("empty feature list")
    k = rbf_from_squared(squared_euclidean(features, features), gamma)
    return (k + k.T) / 2


def cross_kernel(test: np.ndarray, train: np.ndarray, gamma: float) -> np.ndarray:
    return rbf_from_squared(squared_euclidean(test, train), gamma)


# --------------------------------------------------------------------------
# binary SMO

def dual_objective(alphas: np.ndarray, kernel: np.ndarray, y: np.ndarray) -> float:
    """``W(a) = sum(a) - 1/2 sum_ij a_i a_j y_i y_j K_ij`` (to be maximised)."""
    ay = alphas * y
    return float(alphas.sum() - 0.5 * ay @ kernel @ ay)


def _violations(alpha, y, grad, c):
    """Scores ``-y_t G_t`` and the masks of the up / low index sets."""
    score = -y * grad
    up = ((y > 0) & (alpha < c)) | ((y < 0) & (alpha > 0))
    low = ((y > 0) & (alpha > 0)) | ((y < 0) & (alpha < c))
    return score, up, low


def _bias(alpha, y, grad, c) -> float:
    score, up, low = _violations(alpha, y, grad, c)
    free = (alpha > 0) & (alpha < c)
    if free.any():
        return float(score[free].mean())
    return float((score[up].max() + score[low].min()) / 2)


def smo_train(kernel: np.ndarray, signed_labels: np.ndarray, config: SvmTrainConfig,
              callback: Optional[Callable[[np.ndarray], None]] = None) -> BinarySvmModel:
    """Solve the binary soft-margin dual on a precomputed kernel.

    Stops when the maximal KKT violation ``max_up(-yG) - min_low(-yG)``
    drops to ``config.tol`` or after ``config.max_passes`` pair updates; in
    the latter case the model is returned with ``converged=False``.
    ``callback`` (if given) receives a copy of the multipliers after each
    accepted update.
    """
    K = np.asarray(kernel, dtype=np.float64)
    y = np.asarray(signed_labels, dtype=np.float64)
    n = y.shape[0]
    if K.shape != (n, n):
        raise ValueError(f"kernel shape {K.shape} does not match {n} labels")
    if not np.all(np.abs(y) == 1):
        raise ValueError("signed labels must be +1 or -1")
    if (y > 0).all() or (y < 0).all():
        raise DegenerateProblemError("both classes are needed to train a binary SVM")

    c = float(config.c_reg)
    Q = (y[:, None] * y[None, :]) * K
    diag = np.diag(Q).copy()
    alpha = np.zeros(n)
    grad = -np.ones(n)  # G = Q a - e at a = 0
    converged = False
    it = 0
    while it < config.max_passes:
        score, up, low = _violations(alpha, y, grad, c)
        i = int(np.flatnonzero(up)[np.argmax(score[up])])
        j = int(np.flatnonzero(low)[np.argmin(score[low])])
        if score[i] - score[j] <= config.tol:
            converged = True
            break
        it += 1

        old_i, old_j = alpha[i], alpha[j]
        qi, qj = Q[i], Q[j]
        if y[i] != y[j]:
            quad = max(diag[i] + diag[j] + 2 * qi[j], _TAU)
            delta = (-grad[i] - grad[j]) / quad
            diff = old_i - old_j
            ai, aj = old_i + delta, old_j + delta
            if diff > 0:
                if aj < 0:
                    aj, ai = 0.0, diff
            elif ai < 0:
                ai, aj = 0.0, -diff
            if diff > 0:
                if ai > c:
                    ai, aj = c, c - diff
            elif aj > c:
                aj, ai = c, c + diff
        else:
            quad = max(diag[i] + diag[j] - 2 * qi[j], _TAU)
            delta = (grad[i] - grad[j]) / quad
            total = old_i + old_j
            ai, aj = old_i - delta, old_j + delta
            if total > c:
                if ai > c:
                    ai, aj = c, total - c
            elif aj < 0:
                aj, ai = 0.0, total
            if total > c:
                if aj > c:
                    aj, ai = c, total - c
            elif ai < 0:
                ai, aj = 0.0, total

        alpha[i], alpha[j] = ai, aj
        grad += qi * (ai - old_i) + qj * (aj - old_j)
        if callback is not None:
            callback(alpha.copy())

    return BinarySvmModel(alphas=alpha, signed_labels=y.astype(np.int64), bias=_bias(alpha, y, grad, c),
                          c_reg=c, converged=converged, iterations=it)


def decision_value(model: BinarySvmModel, kernel_row: np.ndarray) -> np.ndarray | float:
    """``f = sum_i a_i y_i K_i + b`` for one kernel row, or for each row of a 2-D block."""
    kernel_row = np.asarray(kernel_row, dtype=np.float64)
    if kernel_row.shape[-1] != model.alphas.shape[0]:
        raise ValueError(f"kernel row has {kernel_row.shape[-1]} entries, model has {model.alphas.shape[0]} samples")
    f = kernel_row @ model.coef + model.bias
    return float(f) if kernel_row.ndim == 1 else f


# --------------------------------------------------------------------------
# one-vs-one

def train_multiclass_precomputed(kernel: np.ndarray, labels: np.ndarray,
                                 config: SvmTrainConfig) -> MulticlassSvmModel:
    labels = np.asarray(labels, dtype=np.int64)
    kernel = np.asarray(kernel, dtype=np.float64)
    classes = tuple(int(c) for c in np.unique(labels))
    if len(classes) < 2:
        raise DegenerateProblemError(f"need at least 2 classes, got {list(classes)}")
    models, indices = {}, {}
    for a, b in itertools.combinations(classes, 2):
        idx = np.flatnonzero((labels == a) | (labels == b))
        y = np.where(labels[idx] == a, 1, -1)
        models[(a, b)] = smo_train(kernel[np.ix_(idx, idx)], y, config)
        indices[(a, b)] = idx
    return MulticlassSvmModel(classes, models, indices, n_train=labels.shape[0])


def train_multiclass(features: np.ndarray, labels: np.ndarray, config: SvmTrainConfig) -> MulticlassSvmModel:
    """One binary RBF model per class pair; +1 goes to the lower class id."""
    return train_multiclass_precomputed(gram_matrix(features, config.gamma), labels, config)


def pair_rows(model: MulticlassSvmModel, kernel_row: np.ndarray) -> dict[tuple[int, int], np.ndarray]:
    """Slice a kernel row over the whole training set into per-pair rows."""
    kernel_row = np.asarray(kernel_row, dtype=np.float64)
    if kernel_row.shape[-1] != model.n_train:
        raise ValueError(f"kernel row has {kernel_row.shape[-1]} entries, model was trained on {model.n_train}")
    return {pair: kernel_row[..., idx] for pair, idx in model.pair_indices.items()}


def vote(decisions: Mapping[tuple[int, int], float], classes: tuple[int, ...]) -> int:
    """Pairwise vote; ties go to the larger summed |decision| of won duels, then the lower id."""
    votes = dict.fromkeys(classes, 0)
    strength = dict.fromkeys(classes, 0.0)
    for (a, b), f in decisions.items():
        winner = a if f >= 0 else b
        votes[winner] += 1
        strength[winner] += abs(f)
    return min(classes, key=lambda c: (-votes[c], -strength[c], c))


def predict_multiclass(model: MulticlassSvmModel, kernel_rows) -> int | np.ndarray:
    """Predict from kernel values between test sample(s) and the training set.

    ``kernel_rows`` is either a full row (or 2-D block of rows) over the
    training set, or a mapping ``pair -> row`` already aligned with each
    pair model's training subset.
    """
    if isinstance(kernel_rows, Mapping):
        rows = kernel_rows
        if set(rows) != set(model.pair_models):
            raise ValueError("kernel rows do not cover exactly the model's class pairs")
    else:
        rows = pair_rows(model, kernel_rows)
    decisions = {pair: decision_value(model.pair_models[pair], row) for pair, row in rows.items()}
    first = next(iter(decisions.values()))
    if np.ndim(first) == 0:
        return vote(decisions, model.classes)
    n = len(first)
    return np.array([vote({p: float(d[t]) for p, d in decisions.items()}, model.classes)
                     for t in range(n)], dtype=np.int64)


def dump_model(model: MulticlassSvmModel) -> str:
    """Plain-text listing of each pair model, for diffing runs."""
    lines = [f"classes {' '.join(map(str, model.classes))}", f"n_train {model.n_train}"]
    for (a, b), m in model.pair_models.items():
        sv = m.support_indices
        lines.append(f"pair {a} {b}")
        lines.append(f"bias {m.bias!r}")
        lines.append(f"converged {int(m.converged)} iterations {m.iterations}")
        lines.append("support " + " ".join(str(int(model.pair_indices[(a, b)][i])) for i in sv))
        lines.append("alphas " + " ".join(repr(float(m.alphas[i])) for i in sv))
    return "\n".join(lines) + "\n"

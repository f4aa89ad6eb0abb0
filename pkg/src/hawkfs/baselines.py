"""Classifiers that plug into the wrapper search.

A classifier only needs ``name`` and ``fit(X, y, n_classes, n_hidden, seed)`` returning an
object with ``predict(X)``. Further baselines (SVM, AdaBoost, trees) can be added by wrapping
any estimator in the same two methods; ``n_hidden`` may simply be ignored.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Protocol

import numpy as np

from . import rwn


class Predictor(Protocol):
    def predict(self, X) -> np.ndarray: ...


class Classifier(Protocol):
    name: str

    def fit(self, X, y, n_classes: int, n_hidden: int, seed: int) -> Predictor: ...


@dataclass(frozen=True)
class RwnClassifier:
    weight_range: tuple[float, float] = (-1.0, 1.0)
    name: str = "rwn"

    def fit(self, X, y, n_classes, n_hidden, seed):
        config = rwn.RwnConfig(n_hidden=n_hidden, weight_range=tuple(self.weight_range), seed=seed)
        return rwn.train(X, y, config, n_classes=n_classes)


# --------------------------------------------------------------------------- KNN


@dataclass(frozen=True)
class KnnModel:
    X: np.ndarray
    y: np.ndarray
    k: int
    n_classes: int

    def predict(self, X) -> np.ndarray:
        return knn_predict(self, X)


def knn_train(X, y, k: int = 5, n_classes: int | None = None) -> KnnModel:
    X = np.asarray(X, dtype=float)
    y = np.asarray(y, dtype=np.int64)
    if k < 1:
        raise ValueError("k must be positive")
    if k > X.shape[0]:
        raise ValueError(f"k={k} exceeds the {X.shape[0]} training rows")
    if n_classes is None:
        n_classes = int(y.max()) + 1
    return KnnModel(X, y, k, n_classes)


def _sq_distances(Q: np.ndarray, X: np.ndarray) -> np.ndarray:
    # exact differences rather than the |a|^2 - 2ab + |b|^2 expansion, so equal
    # distances compare equal and the index tie rule is honoured
    return ((Q[:, None, :] - X[None, :, :]) ** 2).sum(axis=2)


def knn_predict(model: KnnModel, X, chunk_cells: int = 2_000_000) -> np.ndarray:
    """Majority vote of the k nearest rows (Euclidean).

    Equal distances prefer the lower training index; tied votes the lower class id.
    """
    Q = np.atleast_2d(np.asarray(X, dtype=float))
    if Q.shape[1] != model.X.shape[1]:
        raise ValueError(f"expected {model.X.shape[1]} columns, got {Q.shape[1]}")
    k = model.k
    onehot = np.zeros((model.X.shape[0], model.n_classes))
    onehot[np.arange(model.X.shape[0]), model.y] = 1.0
    step = max(1, chunk_cells // max(1, model.X.shape[0] * model.X.shape[1]))
    out = np.empty(Q.shape[0], dtype=np.int64)
    for s in range(0, Q.shape[0], step):
        d = _sq_distances(Q[s : s + step], model.X)
        kth = np.partition(d, k - 1, axis=1)[:, k - 1 : k]
        closer = d < kth
        need = k - closer.sum(axis=1, keepdims=True)
        level = d == kth
        chosen = closer | (level & (np.cumsum(level, axis=1) <= need))
        votes = chosen.astype(float) @ onehot
        out[s : s + step] = np.argmax(votes, axis=1)
    return out


@dataclass(frozen=True)
class KnnClassifier:
    k: int = 5
    name: str = "knn"

    def fit(self, X, y, n_classes, n_hidden, seed):
        return knn_train(X, y, self.k, n_classes)


def make_classifier(name: str, **options) -> Classifier:
    if name == "rwn":
        return RwnClassifier(**options)
    if name == "knn":
        return KnnClassifier(**options)
    raise ValueError(f"unknown classifier {name!r}; expected 'rwn' or 'knn'")

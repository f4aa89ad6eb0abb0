"""Random Weight Network: a single hidden layer with frozen random weights and
least-squares output weights obtained from the Moore-Penrose pseudoinverse."""

from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np
from scipy.special import expit

MAX_HIDDEN = 1024


@dataclass(frozen=True)
class RwnConfig:
    n_hidden: int
    weight_range: tuple[float, float] = (-1.0, 1.0)
    activation: str = "sigmoid"
    seed: int = 0

    def __post_init__(self):
        if not 1 <= self.n_hidden <= MAX_HIDDEN:
            raise ValueError(f"n_hidden must be in [1, {MAX_HIDDEN}], got {self.n_hidden}")
        lo, hi = self.weight_range
        if not lo < hi:
            raise ValueError("weight_range lower bound must be below the upper bound")
        if self.activation != "sigmoid":
            raise ValueError(f"unsupported activation {self.activation!r}")


@dataclass(frozen=True)
class RwnModel:
    input_weights: np.ndarray  # (n_hidden, n_features)
    hidden_biases: np.ndarray  # (n_hidden,)
    output_weights: np.ndarray  # (n_hidden, n_classes)
    config: RwnConfig
    class_names: tuple[str, ...] = ()

    @property
    def n_features(self) -> int:
        return self.input_weights.shape[1]

    @property
    def n_classes(self) -> int:
        return self.output_weights.shape[1]

    def predict(self, X) -> np.ndarray:
        return predict(self, X)

    def to_json(self) -> str:
        return json.dumps(
            {
                "n_features": self.n_features,
                "n_hidden": self.config.n_hidden,
                "n_classes": self.n_classes,
                "seed": self.config.seed,
                "weight_range": list(self.config.weight_range),
                "activation": self.config.activation,
                "class_names": list(self.class_names),
                "input_weights": self.input_weights.tolist(),
                "hidden_biases": self.hidden_biases.tolist(),
                "output_weights": self.output_weights.tolist(),
            }
        )

    @classmethod
    def from_json(cls, text: str) -> "RwnModel":
        doc = json.loads(text)
        config = RwnConfig(
            doc["n_hidden"], tuple(doc["weight_range"]), doc["activation"], doc["seed"]
        )
        W = np.array(doc["input_weights"], dtype=float).reshape(doc["n_hidden"], doc["n_features"])
        B = np.array(doc["output_weights"], dtype=float).reshape(doc["n_hidden"], doc["n_classes"])
        return cls(W, np.array(doc["hidden_biases"], dtype=float), B, config, tuple(doc["class_names"]))


def _svd_cutoff(A: np.ndarray):
    U, s, Vt = np.linalg.svd(A, full_matrices=False)
    tol = max(A.shape) * np.finfo(A.dtype).eps * (s[0] if s.size else 0.0)
    inv = np.zeros_like(s)
    keep = s > tol
    inv[keep] = 1.0 / s[keep]
    return U, inv, Vt


def pseudoinverse(A) -> np.ndarray:
    """Moore-Penrose inverse via SVD; singular values at or below
    max(m, n) * eps * sigma_max are treated as zero."""
    A = np.asarray(A, dtype=float)
    if A.size == 0:
        raise ValueError("pseudoinverse of an empty matrix")
    U, inv, Vt = _svd_cutoff(A)
    return (Vt.T * inv) @ U.T


def pinv_solve(A: np.ndarray, T: np.ndarray) -> np.ndarray:
    """pseudoinverse(A) @ T without forming the inverse explicitly."""
    U, inv, Vt = _svd_cutoff(A)
    return Vt.T @ ((U.T @ T) * inv[:, None])


def _check_columns(model: RwnModel, X: np.ndarray) -> np.ndarray:
    X = np.atleast_2d(np.asarray(X, dtype=float))
    if X.shape[1] != model.n_features:
        raise ValueError(f"expected {model.n_features} columns, got {X.shape[1]}")
    return X


def hidden_activations(model: RwnModel, X) -> np.ndarray:
    X = _check_columns(model, X)
    return expit(X @ model.input_weights.T + model.hidden_biases)


def one_hot(y, n_classes: int) -> np.ndarray:
    T = np.zeros((len(y), n_classes))
    T[np.arange(len(y)), y] = 1.0
    return T


def train(X, y, config: RwnConfig, n_classes: int | None = None, class_names=()) -> RwnModel:
    """Draw the hidden layer from ``config.seed`` and solve the output weights.

    ``n_classes`` should come from the global label registry so a partition that lacks
    some class still yields a model with one output column per class.
    """
    X = np.atleast_2d(np.asarray(X, dtype=float))
    y = np.asarray(y, dtype=np.int64)
    if X.shape[0] == 0:
        raise ValueError("cannot train on an empty sample")
    if X.shape[0] != y.shape[0]:
        raise ValueError("X and y disagree on the number of samples")
    if n_classes is None:
        n_classes = len(class_names) if class_names else int(y.max()) + 1
    rng = np.random.default_rng(config.seed)
    lo, hi = config.weight_range
    W = rng.uniform(lo, hi, size=(config.n_hidden, X.shape[1]))
    b = rng.uniform(lo, hi, size=config.n_hidden)
    H = expit(X @ W.T + b)
    B = pinv_solve(H, one_hot(y, n_classes))
    return RwnModel(W, b, B, config, tuple(class_names))


def predict(model: RwnModel, X) -> np.ndarray:
    # np.argmax returns the first maximum, i.e. the lowest class id on ties
    return np.argmax(hidden_activations(model, X) @ model.output_weights, axis=1)

"""Synthetic classification tasks with a known set of informative features."""

from __future__ import annotations

import numpy as np

from .dataset import Dataset


def informative_task(n_samples: int = 600, n_informative: int = 5, n_noise: int = 15,
                     margin: float = 0.25, seed: int = 0) -> Dataset:
    """Binary task whose label is the sign of (sum of informative features - n_informative / 2).

    Rows within ``margin`` of the boundary are rejected, so all informative features
    together separate the classes, while dropping any one of them leaves overlap.
    Informative columns come first, named ``inf_*``; the noise columns are ``noise_*``.
    """
    rng = np.random.default_rng(seed)
    rows, labels = [], []
    need = n_samples
    while need > 0:
        X = rng.random((2 * need + 16, n_informative + n_noise))
        score = X[:, :n_informative].sum(axis=1) - n_informative / 2
        keep = np.abs(score) > margin
        rows.append(X[keep][:need])
        labels.append((score[keep] > 0).astype(np.int64)[:need])
        need -= rows[-1].shape[0]
    names = [f"inf_{i}" for i in range(n_informative)] + [f"noise_{i}" for i in range(n_noise)]
    return Dataset(np.vstack(rows), np.concatenate(labels), names, ["negative", "positive"])

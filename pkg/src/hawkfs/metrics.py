"""Confusion-matrix metrics: accuracy, precision, recall and F-measure."""

from __future__ import annotations

from dataclasses import asdict, dataclass, field

import numpy as np

BINARY = "binary_positive_class"
MACRO = "macro"
POSITIVE_CLASS = 1


@dataclass(frozen=True)
class ClassScores:
    precision: float
    recall: float
    f_measure: float
    support: int


@dataclass(frozen=True)
class MetricsReport:
    accuracy: float
    precision: float
    recall: float
    f_measure: float
    averaging: str = MACRO
    per_class: list[ClassScores] = field(default_factory=list)

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, doc: dict) -> "MetricsReport":
        per_class = [ClassScores(**c) for c in doc.get("per_class", [])]
        return cls(
            float(doc["accuracy"]),
            float(doc["precision"]),
            float(doc["recall"]),
            float(doc["f_measure"]),
            doc.get("averaging", MACRO),
            per_class,
        )


def confusion(y_true, y_pred, n_classes: int) -> np.ndarray:
    """counts[i, j] = number of samples of true class i predicted as j."""
    y_true = np.asarray(y_true, dtype=np.int64)
    y_pred = np.asarray(y_pred, dtype=np.int64)
    if y_true.shape != y_pred.shape:
        raise ValueError(f"length mismatch: {y_true.shape[0]} vs {y_pred.shape[0]}")
    for name, y in (("y_true", y_true), ("y_pred", y_pred)):
        if y.size and (y.min() < 0 or y.max() >= n_classes):
            raise ValueError(f"{name} holds a label outside [0, {n_classes})")
    flat = np.bincount(y_true * n_classes + y_pred, minlength=n_classes * n_classes)
    return flat.reshape(n_classes, n_classes)


def _ratio(num: float, den: float) -> float:
    return float(num / den) if den > 0 else 0.0


def default_averaging(n_classes: int) -> str:
    return BINARY if n_classes == 2 else MACRO


def report(cm, averaging: str | None = None) -> MetricsReport:
    """Aggregate metrics from a confusion matrix.

    Zero denominators give 0. ``binary_positive_class`` reports class 1,
    ``macro`` the unweighted class mean. Default depends on the class count.
    """
    cm = np.asarray(cm, dtype=np.int64)
    if cm.ndim != 2 or cm.shape[0] != cm.shape[1] or cm.shape[0] == 0:
        raise ValueError("confusion matrix must be square and non-empty")
    total = cm.sum()
    if total <= 0:
        raise ValueError("confusion matrix is empty")
    averaging = averaging or default_averaging(cm.shape[0])
    tp = np.diag(cm)
    predicted = cm.sum(axis=0)
    actual = cm.sum(axis=1)
    per_class = []
    for c in range(cm.shape[0]):
        p = _ratio(tp[c], predicted[c])
        r = _ratio(tp[c], actual[c])
        f = _ratio(2 * p * r, p + r)
        per_class.append(ClassScores(p, r, f, int(actual[c])))

    if averaging == BINARY:
        if cm.shape[0] != 2:
            raise ValueError("binary averaging needs a 2-class matrix")
        chosen = per_class[POSITIVE_CLASS]
        prec, rec, f = chosen.precision, chosen.recall, chosen.f_measure
    elif averaging == MACRO:
        prec = float(np.mean([c.precision for c in per_class]))
        rec = float(np.mean([c.recall for c in per_class]))
        f = float(np.mean([c.f_measure for c in per_class]))
    else:
        raise ValueError(f"unknown averaging {averaging!r}")
    return MetricsReport(_ratio(tp.sum(), total), prec, rec, f, averaging, per_class)


def evaluate(y_true, y_pred, n_classes: int, averaging: str | None = None) -> MetricsReport:
    return report(confusion(y_true, y_pred, n_classes), averaging)

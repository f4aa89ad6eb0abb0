"""Tabular dataset loading, integration, min-max scaling, splitting and client partitioning."""

from __future__ import annotations

import csv
import json
import math
import os
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np


class DatasetError(ValueError):
    """Raised for malformed input files or impossible split requests."""


@dataclass(frozen=True)
class Dataset:
    features: np.ndarray
    labels: np.ndarray
    feature_names: list[str]
    class_names: list[str]
    # positions of the rows in the dataset they were cut from; survives split/partition
    sample_ids: np.ndarray = field(default=None, repr=False)  # type: ignore[assignment]

    def __post_init__(self):
        features = np.asarray(self.features, dtype=float)
        labels = np.asarray(self.labels, dtype=np.int64)
        if features.ndim != 2:
            raise DatasetError("features must be a 2-D matrix")
        if features.shape[0] != labels.shape[0]:
            raise DatasetError(
                f"{features.shape[0]} feature rows but {labels.shape[0]} labels"
            )
        if features.shape[1] < 1:
            raise DatasetError("dataset has no feature columns")
        if len(self.feature_names) != features.shape[1]:
            raise DatasetError("feature_names length does not match feature columns")
        if labels.size and (labels.min() < 0 or labels.max() >= len(self.class_names)):
            raise DatasetError("label outside the class registry")
        if np.isnan(features).any():
            raise DatasetError("features contain missing values")
        ids = self.sample_ids
        ids = np.arange(labels.shape[0]) if ids is None else np.asarray(ids, dtype=np.int64)
        if ids.shape != labels.shape:
            raise DatasetError("sample_ids length does not match labels")
        object.__setattr__(self, "features", features)
        object.__setattr__(self, "labels", labels)
        object.__setattr__(self, "feature_names", list(self.feature_names))
        object.__setattr__(self, "class_names", list(self.class_names))
        object.__setattr__(self, "sample_ids", ids)

    @property
    def n_samples(self) -> int:
        return self.features.shape[0]

    @property
    def n_features(self) -> int:
        return self.features.shape[1]

    @property
    def n_classes(self) -> int:
        return len(self.class_names)

    def take(self, rows) -> "Dataset":
        """Row subset that keeps the registries and the original sample ids."""
        rows = np.asarray(rows, dtype=np.int64)
        return Dataset(
            self.features[rows],
            self.labels[rows],
            self.feature_names,
            self.class_names,
            self.sample_ids[rows],
        )

    def select_columns(self, mask) -> "Dataset":
        mask = np.asarray(mask, dtype=bool)
        names = [n for n, keep in zip(self.feature_names, mask) if keep]
        return Dataset(
            self.features[:, mask], self.labels, names, self.class_names, self.sample_ids
        )

    def class_counts(self) -> np.ndarray:
        return np.bincount(self.labels, minlength=self.n_classes)


def concat(parts: Sequence[Dataset]) -> Dataset:
    """Stack datasets sharing one schema; sample ids are kept as they are."""
    if not parts:
        raise DatasetError("nothing to concatenate")
    first = parts[0]
    for p in parts[1:]:
        if p.feature_names != first.feature_names or p.class_names != first.class_names:
            raise DatasetError("cannot concatenate datasets with different schemas")
    return Dataset(
        np.vstack([p.features for p in parts]),
        np.concatenate([p.labels for p in parts]),
        first.feature_names,
        first.class_names,
        np.concatenate([p.sample_ids for p in parts]),
    )


# --------------------------------------------------------------------------- loading


def _read_rows(path: str | os.PathLike, label_column, drop_columns=(), id_column=None):
    path = Path(path)
    if not path.is_file():
        raise DatasetError(f"file not found: {path}")
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        try:
            header = [h.strip() for h in next(reader)]
        except StopIteration:
            raise DatasetError(f"{path}: empty file") from None

        if isinstance(label_column, int):
            if not 0 <= label_column < len(header):
                raise DatasetError(f"{path}: label column index {label_column} out of range")
            label_idx = label_column
        else:
            if label_column not in header:
                raise DatasetError(f"{path}: label column {label_column!r} not in header")
            label_idx = header.index(label_column)
        dropped = {label_idx}
        for col in drop_columns:
            if col not in header:
                raise DatasetError(f"{path}: column {col!r} not in header")
            dropped.add(header.index(col))
        id_idx = None
        if id_column is not None:
            if id_column not in header:
                raise DatasetError(f"{path}: id column {id_column!r} not in header")
            id_idx = header.index(id_column)
            dropped.add(id_idx)
        keep = [j for j in range(len(header)) if j not in dropped]
        ids: list[int] = []

        rows: list[list[float]] = []
        raw_labels: list[str] = []
        for r, row in enumerate(reader, start=1):
            if not row:
                continue
            if len(row) != len(header):
                raise DatasetError(
                    f"{path}: row {r} has {len(row)} fields, header has {len(header)}"
                )
            values = []
            for j in keep:
                cell = row[j].strip()
                if cell == "":
                    raise DatasetError(f"missing value at row {r}, column {header[j]}")
                try:
                    values.append(float(cell))
                except ValueError:
                    raise DatasetError(
                        f"{path}: non-numeric value {cell!r} at row {r}, column {header[j]}"
                    ) from None
            label = row[label_idx].strip()
            if label == "":
                raise DatasetError(f"missing value at row {r}, column {header[label_idx]}")
            rows.append(values)
            raw_labels.append(label)
            if id_idx is not None:
                ids.append(int(row[id_idx]))
    if not rows:
        raise DatasetError(f"{path}: no data rows")
    return [header[j] for j in keep], np.array(rows, dtype=float), raw_labels, (ids or None)


def load_csv(path, label_column, drop_columns=(), class_names: Sequence[str] | None = None,
             id_column: str | None = None) -> Dataset:
    """Read a header-first, comma-delimited numeric table.

    String labels become dense ids in order of first appearance unless ``class_names``
    fixes the order explicitly (useful for 0/1 label files where class 1 must stay the
    positive class). ``id_column``, if given, restores ``sample_ids`` instead of
    becoming a feature.
    """
    names, X, raw, ids = _read_rows(path, label_column, drop_columns, id_column)
    if class_names is None:
        registry: dict[str, int] = {}
        for lab in raw:
            registry.setdefault(lab, len(registry))
        classes = list(registry)
    else:
        classes = [str(c) for c in class_names]
        registry = {c: i for i, c in enumerate(classes)}
        unknown = sorted(set(raw) - set(registry))
        if unknown:
            raise DatasetError(f"{path}: labels {unknown} not in class_names")
    y = np.array([registry[lab] for lab in raw], dtype=np.int64)
    return Dataset(X, y, names, classes, ids)


def integrate(
    sources: Iterable[tuple[str | os.PathLike, int]],
    class_names: Sequence[str] | None = None,
    drop_columns=(),
) -> Dataset:
    """Concatenate whole files, each assigned one class id (e.g. benign / attack captures).

    Every file must carry the same header. ``class_names`` defaults to the decimal ids.
    """
    sources = list(sources)
    if not sources:
        raise DatasetError("no source files given")
    names = None
    blocks, labels = [], []
    for path, class_id in sources:
        path = Path(path)
        if not path.is_file():
            raise DatasetError(f"file not found: {path}")
        with open(path, newline="", encoding="utf-8") as fh:
            header = [h.strip() for h in next(csv.reader(fh), [])]
        cols = [h for h in header if h not in drop_columns]
        if names is None:
            names = cols
        elif cols != names:
            raise DatasetError(f"{path}: feature schema differs from {sources[0][0]}")
        X = _read_numeric(path, header, drop_columns)
        blocks.append(X)
        labels.append(np.full(X.shape[0], int(class_id), dtype=np.int64))
    y = np.concatenate(labels)
    if class_names is None:
        class_names = [str(i) for i in range(int(y.max()) + 1)]
    return Dataset(np.vstack(blocks), y, names, list(class_names))


def _read_numeric(path: Path, header: list[str], drop_columns) -> np.ndarray:
    keep = [j for j, h in enumerate(header) if h not in drop_columns]
    rows = []
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        next(reader)
        for r, row in enumerate(reader, start=1):
            if not row:
                continue
            if len(row) != len(header):
                raise DatasetError(
                    f"{path}: row {r} has {len(row)} fields, header has {len(header)}"
                )
            try:
                rows.append([float(row[j]) for j in keep])
            except ValueError:
                for j in keep:
                    cell = row[j].strip()
                    if cell == "":
                        raise DatasetError(f"missing value at row {r}, column {header[j]}") from None
                    try:
                        float(cell)
                    except ValueError:
                        raise DatasetError(
                            f"{path}: non-numeric value {cell!r} at row {r}, column {header[j]}"
                        ) from None
                raise
    if not rows:
        raise DatasetError(f"{path}: no data rows")
    return np.array(rows, dtype=float)


# N-BaIoT device folders grouped by device type, as distributed by UCI.
NBAIOT_DEVICES = {
    "baby_monitor": ["Philips_B120N10_Baby_Monitor"],
    "doorbell": ["Danmini_Doorbell", "Ennio_Doorbell"],
    "security_camera": [
        "Provision_PT_737E_Security_Camera",
        "Provision_PT_838_Security_Camera",
        "SimpleHome_XCS7_1002_WHT_Security_Camera",
        "SimpleHome_XCS7_1003_WHT_Security_Camera",
    ],
    "thermostat": ["Ecobee_Thermostat"],
    "webcam": ["Samsung_SNH_1011_N_Webcam"],
}


def nbaiot_sources(root, device_type: str, multiclass: bool = False) -> list[tuple[Path, int]]:
    """(file, class id) pairs for one N-BaIoT device type.

    Binary framing: benign 0, any attack 1. Multiclass: benign 0, BASHLITE (gafgyt) 1, Mirai 2.
    Expects the extracted layout ``<root>/<device>/benign_traffic.csv`` plus
    ``gafgyt_attacks/*.csv`` and ``mirai_attacks/*.csv``.
    """
    if device_type not in NBAIOT_DEVICES:
        raise DatasetError(f"unknown device type {device_type!r}")
    root = Path(root)
    out: list[tuple[Path, int]] = []
    for device in NBAIOT_DEVICES[device_type]:
        d = root / device
        if not d.is_dir():
            raise DatasetError(f"device folder not found: {d}")
        out.append((d / "benign_traffic.csv", 0))
        for sub, cid in (("gafgyt_attacks", 1), ("mirai_attacks", 2)):
            for f in sorted((d / sub).glob("*.csv")):
                out.append((f, cid if multiclass else 1))
    return out


# --------------------------------------------------------------------------- scaling


@dataclass(frozen=True)
class NormalizationParams:
    min: np.ndarray
    max: np.ndarray

    def to_json(self) -> str:
        return json.dumps({"min": self.min.tolist(), "max": self.max.tolist()})

    @classmethod
    def from_json(cls, text: str) -> "NormalizationParams":
        doc = json.loads(text)
        return cls(np.asarray(doc["min"], dtype=float), np.asarray(doc["max"], dtype=float))


def fit_normalizer(train: Dataset) -> NormalizationParams:
    if train.n_samples == 0:
        raise DatasetError("cannot fit a normalizer on an empty dataset")
    return NormalizationParams(train.features.min(axis=0), train.features.max(axis=0))


def apply_normalizer(data: Dataset, params: NormalizationParams) -> Dataset:
    """Min-max scale to [0, 1] with clamping; constant columns map to 0."""
    if params.min.shape[0] != data.n_features:
        raise DatasetError(
            f"normalizer has {params.min.shape[0]} columns, data has {data.n_features}"
        )
    span = params.max - params.min
    safe = np.where(span > 0, span, 1.0)
    X = (data.features - params.min) / safe
    X[:, span <= 0] = 0.0
    np.clip(X, 0.0, 1.0, out=X)
    return Dataset(X, data.labels, data.feature_names, data.class_names, data.sample_ids)


# --------------------------------------------------------------------------- splitting


@dataclass(frozen=True)
class SplitSpec:
    train_fraction: float = 0.66
    validation_fraction_of_train: float = 0.25
    stratified: bool = True
    seed: int = 0

    def __post_init__(self):
        for name in ("train_fraction", "validation_fraction_of_train"):
            v = getattr(self, name)
            if not 0.0 < v < 1.0:
                raise DatasetError(f"{name} must lie strictly inside (0, 1), got {v}")


def _floor(x: float) -> int:
    # 100 * 0.66 evaluates to 66.00000000000001; absorb that kind of noise
    return int(math.floor(x + 1e-9))


def _allocate(counts: np.ndarray, total: int) -> np.ndarray:
    """Largest-remainder apportionment of ``total`` over classes proportional to ``counts``."""
    n = counts.sum()
    quota = counts * (total / n)
    alloc = np.floor(quota + 1e-9).astype(np.int64)
    rest = total - alloc.sum()
    if rest > 0:
        order = np.lexsort((np.arange(len(counts)), -(quota - alloc)))
        alloc[order[:rest]] += 1
    return alloc


def _two_way(labels: np.ndarray, n_first: int, rng: np.random.Generator, stratified: bool, n_classes: int):
    """Return (first, second) index arrays with ``len(first) == n_first``."""
    n = labels.shape[0]
    if not stratified:
        perm = rng.permutation(n)
        return np.sort(perm[:n_first]), np.sort(perm[n_first:])
    counts = np.bincount(labels, minlength=n_classes)
    present = np.flatnonzero(counts > 0)
    if (counts[present] < 2).any():
        bad = int(present[counts[present] < 2][0])
        raise DatasetError(f"class {bad} has too few samples to appear in every partition")
    first_alloc = np.zeros(n_classes, dtype=np.int64)
    first_alloc[present] = _allocate(counts[present], n_first)
    # every present class must land on both sides; shift single rows between classes
    for c in present:
        if first_alloc[c] == 0:
            donors = [d for d in present if d != c and first_alloc[d] > 1]
            if not donors:
                raise DatasetError(f"class {c} has too few samples to appear in every partition")
            d = max(donors, key=lambda k: first_alloc[k])
            first_alloc[d] -= 1
            first_alloc[c] += 1
        if first_alloc[c] == counts[c]:
            takers = [d for d in present if d != c and counts[d] - first_alloc[d] > 1]
            if not takers:
                raise DatasetError(f"class {c} has too few samples to appear in every partition")
            d = max(takers, key=lambda k: counts[k] - first_alloc[k])
            first_alloc[d] += 1
            first_alloc[c] -= 1
    first, second = [], []
    for c in range(n_classes):
        idx = np.flatnonzero(labels == c)
        idx = idx[rng.permutation(idx.size)]
        first.append(idx[: first_alloc[c]])
        second.append(idx[first_alloc[c]:])
    return np.sort(np.concatenate(first)), np.sort(np.concatenate(second))


def split_indices(data: Dataset, spec: SplitSpec):
    """Index arrays (train, validation, test) into ``data``.

    The training portion is floor(n * train_fraction) rows and the test set gets the rest;
    inside it, the fitting part is floor(n_train * (1 - validation_fraction)) and validation
    gets the rest.
    """
    n = data.n_samples
    n_train = _floor(n * spec.train_fraction)
    if n_train < 2 or n - n_train < 1:
        raise DatasetError(f"{n} samples are too few to split")
    rng = np.random.default_rng(np.random.SeedSequence([spec.seed, 0x5917]))
    pool, test = _two_way(data.labels, n_train, rng, spec.stratified, data.n_classes)
    n_fit = _floor(n_train * (1.0 - spec.validation_fraction_of_train))
    fit_local, val_local = _two_way(data.labels[pool], n_fit, rng, spec.stratified, data.n_classes)
    return pool[fit_local], pool[val_local], test


def split(data: Dataset, spec: SplitSpec) -> tuple[Dataset, Dataset, Dataset]:
    tr, va, te = split_indices(data, spec)
    return data.take(tr), data.take(va), data.take(te)


def holdout(data: Dataset, validation_fraction: float, seed: int, stratified: bool = True):
    """Single train/validation cut used for a client's local data."""
    if not 0.0 < validation_fraction < 1.0:
        raise DatasetError("validation_fraction must lie strictly inside (0, 1)")
    n_fit = _floor(data.n_samples * (1.0 - validation_fraction))
    if n_fit < 1 or n_fit >= data.n_samples:
        raise DatasetError(f"{data.n_samples} samples are too few to split")
    rng = np.random.default_rng(np.random.SeedSequence([seed, 0x401D]))
    a, b = _two_way(data.labels, n_fit, rng, stratified, data.n_classes)
    return data.take(a), data.take(b)


def subsample(data: Dataset, n_rows: int, seed: int) -> Dataset:
    """Stratified subsample of at most ``n_rows`` rows (identity when already smaller)."""
    if n_rows >= data.n_samples:
        return data
    rng = np.random.default_rng(np.random.SeedSequence([seed, 0x5AB5]))
    counts = data.class_counts()
    present = counts > 0
    alloc = np.zeros_like(counts)
    alloc[present] = np.maximum(_allocate(counts[present], n_rows), 1)
    keep = []
    for c in np.flatnonzero(present):
        idx = np.flatnonzero(data.labels == c)
        keep.append(np.sort(rng.choice(idx, size=min(alloc[c], idx.size), replace=False)))
    return data.take(np.sort(np.concatenate(keep)))


def partition_clients(train: Dataset, n_clients: int, seed: int) -> list[Dataset]:
    """Disjoint, exhaustive, class-stratified shards drawn without replacement.

    Rows are shuffled within each class, the classes are laid end to end, and the
    sequence is dealt round-robin, so shard sizes differ by at most one.
    """
    if n_clients < 1:
        raise DatasetError("n_clients must be positive")
    if n_clients > train.n_samples:
        raise DatasetError(f"{n_clients} clients but only {train.n_samples} samples")
    rng = np.random.default_rng(np.random.SeedSequence([seed, 0xC11E]))
    order = []
    for c in range(train.n_classes):
        idx = np.flatnonzero(train.labels == c)
        order.append(idx[rng.permutation(idx.size)])
    order = np.concatenate(order)
    return [train.take(np.sort(order[k::n_clients])) for k in range(n_clients)]


# --------------------------------------------------------------------------- writing


def to_csv(data: Dataset, path, label_name: str = "label", id_name: str | None = None) -> None:
    """Write features plus a trailing label column holding class names.

    With ``id_name`` the sample ids go in a leading column of that name.
    """
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        lead = [id_name] if id_name else []
        w.writerow([*lead, *data.feature_names, label_name])
        for sid, row, lab in zip(data.sample_ids, data.features, data.labels):
            lead = [int(sid)] if id_name else []
            w.writerow([*lead, *(repr(float(v)) for v in row), data.class_names[lab]])

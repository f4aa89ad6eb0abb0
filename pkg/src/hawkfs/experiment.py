"""End-to-end experiment plumbing behind the CLI: prepare artifacts, run, compare reports."""

from __future__ import annotations

import hashlib
import json
import logging
import os
import tempfile
import time
from collections import Counter
from pathlib import Path
from typing import Optional

import numpy as np

from . import __version__
from .baselines import make_classifier
from .config import RunConfig
from .dataset import (Dataset, apply_normalizer, fit_normalizer, integrate, load_csv,
                      nbaiot_sources, split, subsample, to_csv)
from .distributed import compare as compare_metrics
from .distributed import run_distributed
from .hho import write_curve_csv
from .wrapper import METRIC_FIELDS, repeat_runs

log = logging.getLogger(__name__)

PREPARED_FILES = ("train.csv", "validation.csv", "test.csv")
ID_COLUMN = "row_id"
LABEL_COLUMN = "label"
VOLATILE_KEYS = ("wall_time",)


# --------------------------------------------------------------------------- file helpers


def atomic_write(path: Path, text: str) -> None:
    """Write via a temporary file in the same folder and rename over the target."""
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _atomic_via(path: Path, writer) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    os.close(fd)
    try:
        writer(tmp)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def dump_json(doc) -> str:
    return json.dumps(doc, indent=2, sort_keys=True) + "\n"


def strip_volatile(doc):
    """Copy of a report without timing fields, for reproducibility comparisons."""
    if isinstance(doc, dict):
        return {k: strip_volatile(v) for k, v in doc.items() if k not in VOLATILE_KEYS}
    if isinstance(doc, list):
        return [strip_volatile(v) for v in doc]
    return doc


def workers_from_env() -> int:
    raw = os.environ.get("HAWKFS_WORKERS", "1")
    try:
        return max(1, int(raw))
    except ValueError:
        return 1


# --------------------------------------------------------------------------- prepare


def build_dataset(cfg: RunConfig) -> Dataset:
    d = cfg.dataset
    if d.path:
        data = load_csv(d.path, d.label_column, d.drop_columns, d.class_names)
    elif d.sources:
        data = integrate([(p, int(c)) for p, c in d.sources], d.class_names, d.drop_columns)
    else:
        names = d.class_names or (["benign", "bashlite", "mirai"] if d.multiclass else ["benign", "attack"])
        data = integrate(nbaiot_sources(d.nbaiot_root, d.device, d.multiclass), names)
    if d.max_rows:
        data = subsample(data, d.max_rows, cfg.seed)
    return data


def prepare(cfg: RunConfig, out_dir) -> dict:
    """Load/integrate, split, fit min-max scaling on the training split, write artifacts."""
    out_dir = Path(out_dir)
    data = build_dataset(cfg)
    train, validation, test = split(data, cfg.split_spec())
    params = fit_normalizer(train)
    parts = [apply_normalizer(p, params) for p in (train, validation, test)]
    for name, part in zip(PREPARED_FILES, parts):
        _atomic_via(out_dir / name, lambda tmp, part=part: to_csv(part, tmp, LABEL_COLUMN, ID_COLUMN))
    atomic_write(out_dir / "normalization.json", params.to_json() + "\n")
    meta = {
        "name": cfg.dataset.name,
        "dataset_id": prepared_id(out_dir),
        "feature_names": data.feature_names,
        "class_names": data.class_names,
        "n_features": data.n_features,
        "sizes": {n.removesuffix(".csv"): p.n_samples for n, p in zip(PREPARED_FILES, parts)},
        "class_counts": {n.removesuffix(".csv"): p.class_counts().tolist()
                         for n, p in zip(PREPARED_FILES, parts)},
        "seed": cfg.seed,
    }
    atomic_write(out_dir / "dataset.json", dump_json(meta))
    log.info("prepared %s: %s", cfg.dataset.name, meta["sizes"])
    return meta


def prepared_id(prepared_dir) -> str:
    h = hashlib.sha256()
    for name in PREPARED_FILES:
        h.update((Path(prepared_dir) / name).read_bytes())
    return h.hexdigest()[:16]


def load_prepared(prepared_dir):
    prepared_dir = Path(prepared_dir)
    missing = [n for n in (*PREPARED_FILES, "dataset.json") if not (prepared_dir / n).is_file()]
    if missing:
        raise FileNotFoundError(f"{prepared_dir}: missing prepared files {missing}; run 'hawkfs prepare' first")
    meta = json.loads((prepared_dir / "dataset.json").read_text(encoding="utf-8"))
    parts = [load_csv(prepared_dir / n, LABEL_COLUMN, class_names=meta["class_names"], id_column=ID_COLUMN)
             for n in PREPARED_FILES]
    return (*parts, meta)


# --------------------------------------------------------------------------- run


def _selection_frequency(entries: list[dict], feature_names: list[str]) -> dict:
    counts = Counter(name for e in entries for name in e["selected_features"])
    total = len(entries)
    return {
        "n_solutions": total,
        "features": [
            {"name": n, "count": counts.get(n, 0), "frequency": counts.get(n, 0) / total}
            for n in feature_names
        ],
    }


def run_experiment(cfg: RunConfig, prepared_dir, out_dir, workers: Optional[int] = None) -> dict:
    """Execute the configured scheme and write report.json, curves and selected_features.json."""
    started = time.perf_counter()
    out_dir = Path(out_dir)
    workers = workers or workers_from_env()
    train, validation, test, meta = load_prepared(prepared_dir)
    dataset_id = prepared_id(prepared_dir)
    layout = cfg.layout(train.n_features)
    options = {"k": cfg.classifier.k} if cfg.classifier.name == "knn" else {
        "weight_range": tuple(cfg.classifier.weight_range)}
    classifier = make_classifier(cfg.classifier.name, **options)
    params, weights = cfg.hho_params(), cfg.fitness_weights()

    report: dict = {
        "tool": "hawkfs",
        "version": __version__,
        "config": cfg.to_dict(),
        "seed": cfg.seed,
        "scheme": cfg.scheme,
        "dataset": {"name": meta["name"], "dataset_id": dataset_id,
                    "n_features": meta["n_features"], "class_names": meta["class_names"],
                    "sizes": meta["sizes"]},
    }
    curves = out_dir / "curves"
    solutions: list[dict] = []

    if cfg.scheme == "centralized":
        rep = repeat_runs(cfg.n_runs, train, validation, test, params, weights, layout,
                          classifier, cfg.seed, workers=workers)
        runs = []
        for i, res in enumerate(rep.runs):
            rel = f"curves/run_{i:03d}.csv"
            _atomic_via(out_dir / rel, lambda tmp, c=res.curve: write_curve_csv(c, tmp))
            entry = {"run": i, **res.to_dict(), "curve_csv": rel}
            runs.append(entry)
            solutions.append(entry)
        agg = {k: v for k, v in rep.aggregate.items() if k != "mean_curve"}
        _atomic_via(curves / "mean.csv", lambda tmp: write_curve_csv(rep.mean_curve, tmp))
        agg["mean_curve_csv"] = "curves/mean.csv"
        report["runs"] = runs
        report["aggregate"] = agg
    else:
        runs, client_entries, curves_all = [], [], []
        for i in range(cfg.n_runs):
            dist = run_distributed(train, validation, test, cfg.n_clients, params, weights,
                                   classifier, cfg.seed + i, layout, workers, dataset_id)
            clients = []
            for c in dist.per_client:
                rel = f"curves/run_{i:03d}/client_{c.client_id}.csv"
                _atomic_via(out_dir / rel, lambda tmp, cv=c.result.curve: write_curve_csv(cv, tmp))
                entry = {**c.to_dict(), "curve_csv": rel}
                clients.append(entry)
                curves_all.append(c.result.curve)
            client_entries.extend(clients)
            runs.append({"run": i, "seed": cfg.seed + i, "clients": clients,
                         "mean": dist.mean, "std": dist.std})
        solutions = client_entries
        agg = {}
        for name in METRIC_FIELDS:
            vals = np.array([e["test_metrics"][name] for e in client_entries])
            agg[name] = float(vals.mean())
            agg[f"{name}_std"] = float(vals.std())
        agg["mean_selected"] = float(np.mean([e["n_selected"] for e in client_entries]))
        agg["mean_n_hidden"] = float(np.mean([e["n_hidden"] for e in client_entries]))
        _atomic_via(curves / "mean.csv",
                    lambda tmp: write_curve_csv(np.mean(curves_all, axis=0), tmp))
        agg["mean_curve_csv"] = "curves/mean.csv"
        report["runs"] = runs
        report["aggregate"] = agg

    report["wall_time"] = time.perf_counter() - started
    atomic_write(out_dir / "selected_features.json",
                 dump_json(_selection_frequency(solutions, meta["feature_names"])))
    atomic_write(out_dir / "report.json", dump_json(report))
    return report


# --------------------------------------------------------------------------- report


def compare_reports(first: dict, second: dict) -> dict:
    """Aggregate metrics side by side with deltas (first minus second)."""
    id_a = first.get("dataset", {}).get("dataset_id")
    id_b = second.get("dataset", {}).get("dataset_id")
    dist = {"mean": second["aggregate"], "dataset_id": id_b or ""}
    return compare_metrics(first["aggregate"], dist, id_a)


def comparison_csv(table: dict, labels=("first", "second")) -> str:
    lines = [f"metric,{labels[0]},{labels[1]},delta"]
    for name, row in table.items():
        lines.append(f"{name},{row['centralized']!r},{row['distributed']!r},{row['delta']!r}")
    return "\n".join(lines) + "\n"


def comparison_text(table: dict, labels=("first", "second")) -> str:
    head = f"{'metric':<10} {labels[0]:>14} {labels[1]:>14} {'delta':>10}"
    rows = [head, "-" * len(head)]
    for name, row in table.items():
        rows.append(f"{name:<10} {row['centralized']:>14.4f} {row['distributed']:>14.4f} {row['delta']:>+10.4f}")
    return "\n".join(rows)

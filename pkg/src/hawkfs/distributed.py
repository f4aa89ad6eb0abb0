"""Simulated distributed training: every client runs the whole wrapper on its own shard.

Nothing is aggregated across clients; the report only averages their test metrics,
which are all measured on the same global test set.
"""

from __future__ import annotations

from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from typing import Optional

import numpy as np

from . import hho
from .baselines import Classifier
from .dataset import Dataset, concat, holdout, partition_clients
from .metrics import MetricsReport
from .wrapper import METRIC_FIELDS, FitnessWeights, SearchResult, derive_seed, run_wrapper

LOCAL_VALIDATION_FRACTION = 0.25


class ClientError(ValueError):
    pass


@dataclass
class ClientRun:
    client_id: int
    local_train_size: int
    result: SearchResult
    sample_ids: np.ndarray

    def to_dict(self) -> dict:
        return {"client_id": self.client_id, "local_train_size": self.local_train_size,
                **self.result.to_dict()}


@dataclass
class DistributedReport:
    per_client: list[ClientRun]
    mean: dict
    std: dict
    centralized_reference: Optional[MetricsReport] = None
    dataset_id: str = ""

    def to_dict(self) -> dict:
        doc = {
            "dataset_id": self.dataset_id,
            "clients": [c.to_dict() for c in self.per_client],
            "mean": self.mean,
            "std": self.std,
        }
        if self.centralized_reference is not None:
            doc["centralized_reference"] = self.centralized_reference.to_dict()
        return doc


def client_seed(seed: int, client_id: int) -> int:
    return derive_seed(seed, "client", client_id)


def _run_client(args) -> ClientRun:
    cid, shard, test, params, weights, layout, classifier, seed = args
    local_seed = client_seed(seed, cid)
    try:
        fit, val = holdout(shard, LOCAL_VALIDATION_FRACTION, local_seed)
    except ValueError as exc:
        raise ClientError(f"client {cid}: {exc}") from exc
    result = run_wrapper(fit, val, test, params, weights, layout, classifier, local_seed)
    return ClientRun(cid, shard.n_samples, result, shard.sample_ids)


def run_distributed(train: Dataset, validation: Dataset, test: Dataset, n_clients: int,
                    params: hho.HhoParams, weights: FitnessWeights = FitnessWeights(),
                    classifier: Optional[Classifier] = None, seed: int = 0,
                    layout: Optional[hho.SolutionLayout] = None, workers: int = 1,
                    dataset_id: str = "") -> DistributedReport:
    """Shard train+validation over ``n_clients`` and run one local search per shard."""
    if n_clients < 2:
        raise ClientError("distributed runs need at least 2 clients; use the centralized path")
    pool = concat([train, validation])
    shards = partition_clients(pool, n_clients, seed)
    jobs = [(cid, shard, test, params, weights, layout, classifier, seed)
            for cid, shard in enumerate(shards)]
    for cid, shard, *_ in jobs:
        if np.count_nonzero(shard.class_counts()) < 2:
            raise ClientError(f"client {cid} holds a single class; it cannot be trained")
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as ex:
            runs = list(ex.map(_run_client, jobs))
    else:
        runs = [_run_client(j) for j in jobs]
    return DistributedReport(runs, *_moments(runs), dataset_id=dataset_id)


def _moments(runs: list[ClientRun]) -> tuple[dict, dict]:
    mean, std = {}, {}
    for name in METRIC_FIELDS:
        vals = np.array([getattr(r.result.test_metrics, name) for r in runs])
        mean[name] = float(vals.mean())
        std[name] = float(vals.std())
    return mean, std


def compare(centralized: MetricsReport | dict, distributed: DistributedReport | dict,
            centralized_id: str | None = None) -> dict:
    """Per-metric delta = centralized - distributed mean.

    Either side may be a serialized report; a dataset id mismatch is an error.
    """
    if isinstance(distributed, DistributedReport):
        dist_mean, dist_id = distributed.mean, distributed.dataset_id
    else:
        dist_mean, dist_id = distributed["mean"], distributed.get("dataset_id", "")
    cen = centralized.to_dict() if isinstance(centralized, MetricsReport) else centralized
    if centralized_id and dist_id and centralized_id != dist_id:
        raise ValueError(f"dataset mismatch: {centralized_id} vs {dist_id}")
    return {
        name: {
            "centralized": float(cen[name]),
            "distributed": float(dist_mean[name]),
            "delta": float(cen[name]) - float(dist_mean[name]),
        }
        for name in METRIC_FIELDS
    }

"""Wrapper feature selection: HHO proposes (feature subset, hidden size) pairs and the
classifier's validation F-measure scores them."""

from __future__ import annotations

import hashlib
import threading
import time
from concurrent.futures import Executor, ProcessPoolExecutor
from dataclasses import asdict, dataclass, field, replace
from typing import Optional

import numpy as np

from . import hho
from .baselines import Classifier, RwnClassifier
from .dataset import Dataset, concat
from .metrics import MetricsReport, evaluate

METRIC_FIELDS = ("accuracy", "precision", "recall", "f_measure")


class CandidateError(RuntimeError):
    """Classifier training failed for one candidate solution."""


@dataclass(frozen=True)
class FitnessWeights:
    alpha: float = 0.99
    beta: float = 0.01
    gamma: float = 0.01

    def __post_init__(self):
        for name in ("alpha", "beta", "gamma"):
            v = getattr(self, name)
            if not 0.0 <= v <= 1.0:
                raise ValueError(f"weight {name} must lie in [0, 1], got {v}")


def fitness_value(err: float, f: int, F: int, n: int, N: int, weights: FitnessWeights = FitnessWeights()) -> float:
    """alpha * err + beta * f/F + gamma * n/N."""
    if not 0.0 <= err <= 1.0:
        raise ValueError(f"err must lie in [0, 1], got {err}")
    if not 1 <= f <= F:
        raise ValueError(f"selected feature count {f} outside [1, {F}]")
    if not 1 <= n <= N:
        raise ValueError(f"hidden size {n} outside [1, {N}]")
    return weights.alpha * err + weights.beta * f / F + weights.gamma * n / N


@dataclass(frozen=True)
class CandidateEvaluation:
    fitness: float
    f_measure: float
    err: float
    n_selected: int
    total_features: int
    n_hidden: int
    max_neurons: int

    def to_dict(self) -> dict:
        return asdict(self)


def derive_seed(*parts) -> int:
    """Stable 63-bit seed from arbitrary printable parts."""
    digest = hashlib.blake2b("|".join(map(str, parts)).encode(), digest_size=8).digest()
    return int.from_bytes(digest, "big") >> 1


def candidate_seed(run_seed: int, decoded: hho.DecodedSolution) -> int:
    return derive_seed(run_seed, decoded.key())


class CandidateEvaluator:
    """Fitness callback for the optimizer, memoized by decoded bitstring."""

    def __init__(self, train: Dataset, validation: Dataset, layout: hho.SolutionLayout,
                 weights: FitnessWeights, classifier: Classifier, run_seed: int,
                 use_cache: bool = True):
        if train.n_features != layout.n_features or validation.n_features != layout.n_features:
            raise ValueError("train/validation columns do not match the solution layout")
        self.train = train
        self.validation = validation
        self.layout = layout
        self.weights = weights
        self.classifier = classifier
        self.run_seed = run_seed
        self.use_cache = use_cache
        self.cache: dict[str, CandidateEvaluation] = {}
        self.n_trainings = 0
        self._lock = threading.Lock()

    def evaluate_decoded(self, decoded: hho.DecodedSolution) -> CandidateEvaluation:
        key = decoded.key()
        if self.use_cache:
            hit = self.cache.get(key)
            if hit is not None:
                return hit
        mask = decoded.feature_mask
        Xtr = self.train.features[:, mask]
        Xva = self.validation.features[:, mask]
        try:
            model = self.classifier.fit(
                Xtr, self.train.labels, self.train.n_classes, decoded.n_hidden,
                candidate_seed(self.run_seed, decoded),
            )
            pred = model.predict(Xva)
        except Exception as exc:
            raise CandidateError(
                f"{self.classifier.name} failed on candidate {key} "
                f"({decoded.n_selected} features, {decoded.n_hidden} hidden)"
            ) from exc
        fm = evaluate(self.validation.labels, pred, self.validation.n_classes).f_measure
        err = 1.0 - fm
        ev = CandidateEvaluation(
            fitness_value(err, decoded.n_selected, self.layout.n_features,
                          decoded.n_hidden, self.layout.max_neurons, self.weights),
            fm, err, decoded.n_selected, self.layout.n_features,
            decoded.n_hidden, self.layout.max_neurons,
        )
        with self._lock:
            self.n_trainings += 1
            if self.use_cache:
                ev = self.cache.setdefault(key, ev)
        return ev

    def evaluate(self, position) -> CandidateEvaluation:
        return self.evaluate_decoded(hho.decode(position, self.layout))

    def __call__(self, position) -> float:
        return self.evaluate(position).fitness


def evaluate_candidate(position, layout, train, validation, weights=FitnessWeights(),
                       classifier: Optional[Classifier] = None, seed: int = 0,
                       cache: Optional[dict] = None) -> CandidateEvaluation:
    """One-off evaluation; pass a dict as ``cache`` to share memoized results across calls."""
    ev = CandidateEvaluator(train, validation, layout, weights, classifier or RwnClassifier(), seed)
    if cache is not None:
        ev.cache = cache
    return ev.evaluate(position)


@dataclass
class SearchResult:
    decoded: hho.DecodedSolution
    model: object
    validation_eval: CandidateEvaluation
    test_metrics: MetricsReport
    curve: np.ndarray
    wall_time: float
    selected_features: list[str]
    run_seed: int
    n_evaluations: int = 0
    n_trainings: int = 0
    train_ids: np.ndarray = field(default=None, repr=False)  # type: ignore[assignment]

    def to_dict(self) -> dict:
        return {
            "run_seed": self.run_seed,
            "selected_features": self.selected_features,
            "selected_indices": np.flatnonzero(self.decoded.feature_mask).tolist(),
            "n_selected": self.decoded.n_selected,
            "n_hidden": self.decoded.n_hidden,
            "validation": self.validation_eval.to_dict(),
            "test_metrics": self.test_metrics.to_dict(),
            "best_fitness": float(self.curve[-1]),
            "n_evaluations": self.n_evaluations,
            "n_trainings": self.n_trainings,
            "wall_time": self.wall_time,
        }


def run_wrapper(train: Dataset, validation: Dataset, test: Dataset, params: hho.HhoParams,
                weights: FitnessWeights = FitnessWeights(),
                layout: Optional[hho.SolutionLayout] = None,
                classifier: Optional[Classifier] = None, run_seed: Optional[int] = None,
                executor: Optional[Executor] = None, use_cache: bool = True) -> SearchResult:
    """Search on train/validation, retrain on both restricted to the winning mask, score on test."""
    started = time.perf_counter()
    classifier = classifier or RwnClassifier()
    layout = layout or hho.SolutionLayout(train.n_features)
    run_seed = params.seed if run_seed is None else run_seed
    evaluator = CandidateEvaluator(train, validation, layout, weights, classifier, run_seed, use_cache)
    opt = hho.optimize(replace(params, seed=run_seed), layout, evaluator, executor=executor)

    decoded = hho.decode(opt.best.position, layout)
    val_eval = evaluator.evaluate_decoded(decoded)

    pool = concat([train, validation]).select_columns(decoded.feature_mask)
    test_sel = test.select_columns(decoded.feature_mask)
    assert pool.n_features == test_sel.n_features == decoded.n_selected
    model = classifier.fit(pool.features, pool.labels, pool.n_classes, decoded.n_hidden,
                           candidate_seed(run_seed, decoded))
    pred = model.predict(test_sel.features)
    metrics = evaluate(test.labels, pred, test.n_classes)
    return SearchResult(
        decoded=decoded,
        model=model,
        validation_eval=val_eval,
        test_metrics=metrics,
        curve=opt.curve,
        wall_time=time.perf_counter() - started,
        selected_features=pool.feature_names,
        run_seed=run_seed,
        n_evaluations=opt.n_evaluations,
        n_trainings=evaluator.n_trainings,
        train_ids=pool.sample_ids,
    )


# --------------------------------------------------------------------------- repetitions


def summarize(results: list[SearchResult]) -> dict:
    """Mean and standard deviation of test metrics, subset size and hidden size."""
    out: dict = {}
    for name in METRIC_FIELDS:
        vals = np.array([getattr(r.test_metrics, name) for r in results])
        out[name] = float(vals.mean())
        out[f"{name}_std"] = float(vals.std())
    out["mean_selected"] = float(np.mean([r.decoded.n_selected for r in results]))
    out["mean_n_hidden"] = float(np.mean([r.decoded.n_hidden for r in results]))
    out["mean_curve"] = np.mean([r.curve for r in results], axis=0).tolist()
    return out


@dataclass
class RepeatReport:
    runs: list[SearchResult]
    aggregate: dict

    @property
    def mean_curve(self) -> np.ndarray:
        return np.asarray(self.aggregate["mean_curve"])


def _run_one(args):
    train, validation, test, params, weights, layout, classifier, seed = args
    return run_wrapper(train, validation, test, params, weights, layout, classifier, seed)


def repeat_runs(n_runs: int, train: Dataset, validation: Dataset, test: Dataset,
                params: hho.HhoParams, weights: FitnessWeights = FitnessWeights(),
                layout: Optional[hho.SolutionLayout] = None,
                classifier: Optional[Classifier] = None, run_seed: int = 0,
                workers: int = 1) -> RepeatReport:
    """Independent runs with seeds run_seed, run_seed + 1, ..."""
    if n_runs < 1:
        raise ValueError("n_runs must be at least 1")
    jobs = [(train, validation, test, params, weights, layout, classifier, run_seed + i)
            for i in range(n_runs)]
    if workers > 1 and n_runs > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(_run_one, jobs))
    else:
        results = [_run_one(j) for j in jobs]
    return RepeatReport(results, summarize(results))

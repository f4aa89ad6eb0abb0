"""Run configuration: one JSON document, optional preset profile, flag overrides."""

from __future__ import annotations

import copy
import json
from dataclasses import asdict, dataclass, field, fields
from pathlib import Path
from typing import Any, Optional

from .dataset import NBAIOT_DEVICES, SplitSpec
from .hho import HhoParams, SolutionLayout
from .wrapper import FitnessWeights

# Full-scale published settings and a reduced profile that fits on a desk machine.
PROFILES: dict[str, dict[str, Any]] = {
    "paper": {
        "hho": {"population_size": 200, "max_iterations": 100},
        "n_runs": 30,
        "dataset": {"max_rows": None},
    },
    "desk": {
        "hho": {"population_size": 30, "max_iterations": 30},
        "n_runs": 5,
        "dataset": {"max_rows": 20000},
    },
}


@dataclass
class DatasetConfig:
    name: str = "dataset"
    path: Optional[str] = None
    label_column: Any = "label"
    drop_columns: list = field(default_factory=list)
    class_names: Optional[list] = None
    # [[path, class_id], ...] for integration of per-class capture files
    sources: Optional[list] = None
    nbaiot_root: Optional[str] = None
    device: Optional[str] = None
    multiclass: bool = False
    max_rows: Optional[int] = None


@dataclass
class SplitConfig:
    train_fraction: float = 0.66
    validation_fraction_of_train: float = 0.25
    stratified: bool = True


@dataclass
class HhoConfig:
    population_size: int = 200
    max_iterations: int = 100
    levy_beta: float = 1.5


@dataclass
class WeightsConfig:
    alpha: float = 0.99
    beta: float = 0.01
    gamma: float = 0.01


@dataclass
class ClassifierConfig:
    name: str = "rwn"
    k: int = 5
    weight_range: list = field(default_factory=lambda: [-1.0, 1.0])


@dataclass
class RunConfig:
    dataset: DatasetConfig = field(default_factory=DatasetConfig)
    split: SplitConfig = field(default_factory=SplitConfig)
    hho: HhoConfig = field(default_factory=HhoConfig)
    weights: WeightsConfig = field(default_factory=WeightsConfig)
    neuron_bits: int = 10
    classifier: ClassifierConfig = field(default_factory=ClassifierConfig)
    scheme: str = "centralized"
    n_clients: int = 4
    n_runs: int = 30
    seed: int = 0
    out: str = "results"
    profile: str = "paper"

    # ---- conversions

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, doc: dict) -> "RunConfig":
        cfg = cls()
        _merge_into(cfg, doc)
        return cfg

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True)

    # ---- typed views

    @property
    def max_neurons(self) -> int:
        return 2**self.neuron_bits

    def split_spec(self) -> SplitSpec:
        return SplitSpec(self.split.train_fraction, self.split.validation_fraction_of_train,
                         self.split.stratified, self.seed)

    def hho_params(self) -> HhoParams:
        return HhoParams(self.hho.population_size, self.hho.max_iterations, self.seed,
                         self.hho.levy_beta)

    def fitness_weights(self) -> FitnessWeights:
        return FitnessWeights(self.weights.alpha, self.weights.beta, self.weights.gamma)

    def layout(self, n_features: int) -> SolutionLayout:
        return SolutionLayout(n_features, self.neuron_bits)

    def validate(self) -> list[str]:
        """Every problem found, so the CLI can report them all before computing anything."""
        errors = []
        d = self.dataset
        given = [x for x in (d.path, d.sources, d.nbaiot_root) if x]
        if len(given) != 1:
            errors.append("dataset: give exactly one of path, sources, nbaiot_root")
        if d.nbaiot_root and d.device not in NBAIOT_DEVICES:
            errors.append(f"dataset.device must be one of {sorted(NBAIOT_DEVICES)}")
        if d.max_rows is not None and d.max_rows < 2:
            errors.append("dataset.max_rows must be at least 2")
        for name in ("train_fraction", "validation_fraction_of_train"):
            v = getattr(self.split, name)
            if not 0.0 < v < 1.0:
                errors.append(f"split.{name} must lie strictly inside (0, 1)")
        if self.hho.population_size < 2:
            errors.append("hho.population_size must be at least 2")
        if self.hho.max_iterations < 1:
            errors.append("hho.max_iterations must be at least 1")
        if not 1.0 < self.hho.levy_beta <= 2.0:
            errors.append("hho.levy_beta must lie in (1, 2]")
        for name in ("alpha", "beta", "gamma"):
            if not 0.0 <= getattr(self.weights, name) <= 1.0:
                errors.append(f"weights.{name} must lie in [0, 1]")
        if not 1 <= self.neuron_bits <= 10:
            errors.append("neuron_bits must be in [1, 10] (at most 1024 hidden neurons)")
        if self.classifier.name not in ("rwn", "knn"):
            errors.append("classifier.name must be 'rwn' or 'knn'")
        if self.classifier.k < 1:
            errors.append("classifier.k must be positive")
        if self.scheme not in ("centralized", "distributed"):
            errors.append("scheme must be 'centralized' or 'distributed'")
        if self.scheme == "distributed" and self.n_clients < 2:
            errors.append("n_clients must be at least 2 for the distributed scheme")
        if self.n_runs < 1:
            errors.append("n_runs must be at least 1")
        if not 0 <= self.seed < 2**64:
            errors.append("seed must be a 64-bit unsigned integer")
        if self.profile not in PROFILES:
            errors.append(f"profile must be one of {sorted(PROFILES)}")
        return errors


class ConfigError(ValueError):
    pass


def _merge_into(obj, doc: dict, prefix: str = "") -> None:
    known = {f.name: f for f in fields(obj)}
    for key, value in doc.items():
        if key not in known:
            raise ConfigError(f"unknown config key '{prefix}{key}'")
        current = getattr(obj, key)
        if hasattr(current, "__dataclass_fields__"):
            if not isinstance(value, dict):
                raise ConfigError(f"{prefix}{key} must be an object")
            _merge_into(current, value, f"{prefix}{key}.")
        else:
            setattr(obj, key, copy.deepcopy(value))


def resolve(doc: Optional[dict] = None, profile: Optional[str] = None, **overrides) -> RunConfig:
    """defaults <- profile preset <- config document <- flag overrides (None means unset)."""
    doc = doc or {}
    name = profile or doc.get("profile", "paper")
    if name not in PROFILES:
        raise ConfigError(f"unknown profile {name!r}; expected one of {sorted(PROFILES)}")
    cfg = RunConfig()
    _merge_into(cfg, PROFILES[name])
    _merge_into(cfg, doc)
    cfg.profile = name
    for key, value in overrides.items():
        if value is not None:
            setattr(cfg, key, value)
    return cfg


def load(path) -> dict:
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}: invalid JSON ({exc})") from exc
    if not isinstance(doc, dict):
        raise ConfigError(f"{path}: top level must be an object")
    return doc

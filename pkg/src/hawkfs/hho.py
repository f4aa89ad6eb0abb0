"""Harris Hawks Optimization over the unit box [0, 1]^D, minimizing a fitness callback.

Each hawk draws its random numbers from its own stream keyed by (seed, iteration, hawk),
and every iteration moves all hawks against a snapshot of the previous population, so
a parallel schedule gives exactly the same trajectory as the sequential loop.
"""

from __future__ import annotations

import csv
import math
from concurrent.futures import Executor
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

LOWER, UPPER = 0.0, 1.0

Fitness = Callable[[np.ndarray], float]


@dataclass(frozen=True)
class SolutionLayout:
    """L feature bits followed by M bits encoding the hidden-layer size."""

    n_features: int
    neuron_bits: int = 10

    def __post_init__(self):
        if self.n_features < 1 or self.neuron_bits < 1:
            raise ValueError("n_features and neuron_bits must be positive")

    @property
    def dim(self) -> int:
        return self.n_features + self.neuron_bits

    @property
    def max_neurons(self) -> int:
        return 2**self.neuron_bits


@dataclass(frozen=True)
class HhoParams:
    population_size: int = 200
    max_iterations: int = 100
    seed: int = 0
    levy_beta: float = 1.5

    def __post_init__(self):
        if self.population_size < 2:
            raise ValueError("population_size must be at least 2")
        if self.max_iterations < 1:
            raise ValueError("max_iterations must be at least 1")
        if not 1.0 < self.levy_beta <= 2.0:
            raise ValueError("levy_beta must lie in (1, 2]")


@dataclass
class Hawk:
    position: np.ndarray
    fitness: float


@dataclass(frozen=True)
class DecodedSolution:
    feature_mask: np.ndarray
    n_hidden: int
    neuron_bits: tuple[bool, ...] = ()

    @property
    def n_selected(self) -> int:
        return int(self.feature_mask.sum())

    def key(self) -> str:
        """Bitstring of the decoded solution, used as a memo key."""
        bits = "".join("1" if b else "0" for b in self.feature_mask)
        return f"{bits}|{self.n_hidden}"

    def __eq__(self, other):
        if not isinstance(other, DecodedSolution):
            return NotImplemented
        return self.key() == other.key()

    def __hash__(self):
        return hash(self.key())


@dataclass
class OptimizeResult:
    best: Hawk
    curve: np.ndarray
    n_evaluations: int
    eval_bound: int = field(default=0)


def decode(position, layout: SolutionLayout) -> DecodedSolution:
    """Threshold at 0.5; an empty feature mask is repaired by switching on the feature
    with the largest coordinate. Neuron bits are read MSB first, offset by one."""
    position = np.asarray(position, dtype=float)
    if position.shape != (layout.dim,):
        raise ValueError(f"position has length {position.shape}, layout needs {layout.dim}")
    bits = position >= 0.5
    mask = bits[: layout.n_features].copy()
    if not mask.any():
        mask[int(np.argmax(position[: layout.n_features]))] = True
    value = 0
    for b in bits[layout.n_features:]:
        value = (value << 1) | int(b)
    return DecodedSolution(mask, value + 1, tuple(bool(b) for b in bits[layout.n_features:]))


def encode(mask, n_hidden: int, layout: SolutionLayout, low: float = 0.25, high: float = 0.75) -> np.ndarray:
    """A position that decodes to (mask, n_hidden); handy for seeding and tests."""
    mask = np.asarray(mask, dtype=bool)
    if not 1 <= n_hidden <= layout.max_neurons:
        raise ValueError("n_hidden out of range for this layout")
    code = n_hidden - 1
    tail = [(code >> (layout.neuron_bits - 1 - k)) & 1 for k in range(layout.neuron_bits)]
    bits = np.concatenate([mask, np.array(tail, dtype=bool)])
    return np.where(bits, high, low)


# --------------------------------------------------------------------------- random streams


def init_rng(seed: int) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence([seed, 1]))


def hawk_rng(seed: int, iteration: int, hawk_index: int) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence([seed, 2, iteration, hawk_index]))


def levy_sigma(beta: float) -> float:
    num = math.gamma(1 + beta) * math.sin(math.pi * beta / 2)
    den = math.gamma((1 + beta) / 2) * beta * 2 ** ((beta - 1) / 2)
    return (num / den) ** (1 / beta)


def levy(dim: int, beta: float, rng: np.random.Generator) -> np.ndarray:
    """Mantegna's Levy-stable step, scaled by 0.01."""
    u = rng.standard_normal(dim) * levy_sigma(beta)
    v = rng.standard_normal(dim)
    return 0.01 * u / np.abs(v) ** (1 / beta)


def escape_energy(t: int, max_iterations: int, e0: float) -> float:
    return 2.0 * e0 * (1.0 - t / max_iterations)


# --------------------------------------------------------------------------- moves


def _clip(x):
    return np.clip(x, LOWER, UPPER)


def perch_on_random_hawk(x, x_rand, r1: float, r2: float) -> np.ndarray:
    return x_rand - r1 * np.abs(x_rand - 2.0 * r2 * x)


def perch_near_family(prey, mean, r3: float, r4: float) -> np.ndarray:
    return (prey - mean) - r3 * (LOWER + r4 * (UPPER - LOWER))


def soft_besiege(x, prey, E: float, J: float) -> np.ndarray:
    return (prey - x) - E * np.abs(J * prey - x)


def hard_besiege(x, prey, E: float) -> np.ndarray:
    return prey - E * np.abs(prey - x)


def dive_target(base, prey, E: float, J: float) -> np.ndarray:
    """Y of the rapid-dive moves; ``base`` is the hawk (soft) or the swarm mean (hard)."""
    return prey - E * np.abs(J * prey - base)


def exploration_move(x, population: np.ndarray, prey, rng: np.random.Generator, mean=None) -> np.ndarray:
    """Random perch: next to a random swarm member (q >= 0.5) or relative to prey and swarm mean.

    Draw order: q, then (member index, r1, r2) or (r3, r4).
    """
    q = rng.random()
    if q >= 0.5:
        j = int(rng.integers(population.shape[0]))
        r1, r2 = rng.random(), rng.random()
        new = perch_on_random_hawk(x, population[j], r1, r2)
    else:
        if mean is None:
            mean = population.mean(axis=0)
        r3, r4 = rng.random(), rng.random()
        new = perch_near_family(prey, mean, r3, r4)
    return _clip(new)


def exploitation_move(x, fx: float, prey, mean, E: float, fitness: Fitness, rng: np.random.Generator, beta: float = 1.5):
    """One besiege step. Returns (position, fitness or None when not yet evaluated, evaluations spent).

    Draw order: escape chance r, jump r5, then for dives the S vector and the Levy step.
    """
    r = rng.random()
    J = 2.0 * (1.0 - rng.random())
    if r >= 0.5:
        if abs(E) >= 0.5:
            return _clip(soft_besiege(x, prey, E, J)), None, 0
        return _clip(hard_besiege(x, prey, E)), None, 0

    S = rng.random(x.shape[0])
    step = levy(x.shape[0], beta, rng)
    Y = dive_target(x if abs(E) >= 0.5 else mean, prey, E, J)
    Z = Y + S * step
    Y, Z = _clip(Y), _clip(Z)
    fy = fitness(Y)
    if fy < fx:
        return Y, fy, 1
    fz = fitness(Z)
    if fz < fx:
        return Z, fz, 2
    return x, fx, 2


# --------------------------------------------------------------------------- driver


def initialize(params: HhoParams, dim: int, fitness: Fitness) -> tuple[np.ndarray, np.ndarray]:
    rng = init_rng(params.seed)
    X = rng.random((params.population_size, dim))
    f = np.array([fitness(x) for x in X], dtype=float)
    return X, f


def _dim(layout) -> int:
    return layout if isinstance(layout, int) else layout.dim


def optimize(
    params: HhoParams,
    layout: SolutionLayout | int,
    fitness: Fitness,
    executor: Optional[Executor] = None,
    on_iteration: Optional[Callable[[int, np.ndarray, np.ndarray], None]] = None,
) -> OptimizeResult:
    """Minimize ``fitness`` over [0, 1]^D for ``params.max_iterations`` iterations.

    ``on_iteration(t, positions, fitness_values)`` sees the population after each iteration.
    """
    dim = _dim(layout)
    T = params.max_iterations
    X, fit = initialize(params, dim, fitness)
    n_evals = X.shape[0]
    b = int(np.argmin(fit))
    best = Hawk(X[b].copy(), float(fit[b]))
    curve = np.empty(T)

    for t in range(T):
        prey = best.position.copy()
        mean = X.mean(axis=0)
        snapshot = X.copy()

        def move(i: int):
            rng = hawk_rng(params.seed, t, i)
            E = escape_energy(t, T, 2.0 * rng.random() - 1.0)
            if abs(E) >= 1.0:
                new, fnew, spent = exploration_move(snapshot[i], snapshot, prey, rng, mean), None, 0
            else:
                new, fnew, spent = exploitation_move(
                    snapshot[i], fit[i], prey, mean, E, fitness, rng, params.levy_beta
                )
            if fnew is None:
                fnew, spent = fitness(new), spent + 1
            return new, float(fnew), spent

        if executor is None:
            moved = [move(i) for i in range(X.shape[0])]
        else:
            moved = list(executor.map(move, range(X.shape[0])))

        X = np.array([m[0] for m in moved])
        fit = np.array([m[1] for m in moved])
        n_evals += sum(m[2] for m in moved)
        assert X.min() >= LOWER and X.max() <= UPPER, "hawk left the search box"

        b = int(np.argmin(fit))
        if fit[b] < best.fitness:
            best = Hawk(X[b].copy(), float(fit[b]))
        curve[t] = best.fitness
        if on_iteration is not None:
            on_iteration(t, X, fit)

    bound = params.population_size * (1 + 3 * T)
    assert n_evals <= bound, f"{n_evals} fitness evaluations exceed the bound {bound}"
    return OptimizeResult(best, curve, n_evals, bound)


def write_curve_csv(curve, path) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["iteration", "best_fitness"])
        for i, v in enumerate(curve, start=1):
            w.writerow([i, repr(float(v))])


def read_curve_csv(path) -> np.ndarray:
    with open(path, newline="", encoding="utf-8") as fh:
        rows = list(csv.DictReader(fh))
    return np.array([float(r["best_fitness"]) for r in rows])

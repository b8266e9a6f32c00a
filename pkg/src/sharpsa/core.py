"""Shared domain types: step schedules, problems, trajectories and RNG streams."""

from __future__ import annotations

import bisect
import math
from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence, Union

import numpy as np


# ---------------------------------------------------------------------------
# Step schedules
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class PowerLaw:
    """alpha_t = a / (u + t)**gamma."""

    a: float
    u: float = 1.0
    gamma: float = 1.0

    def __post_init__(self):
        if not self.a > 0:
            raise ValueError(f"a must be positive, got {self.a}")
        if self.u < 0:
            raise ValueError(f"u must be non-negative, got {self.u}")
        if not 0.0 <= self.gamma <= 1.0:
            raise ValueError(f"gamma must lie in [0, 1], got {self.gamma}")
        if self.u == 0 and self.gamma > 0:
            # alpha_0 would be infinite
            raise ValueError("u = 0 requires gamma = 0")

    def rate(self, t: int) -> float:
        return self.a / (self.u + t) ** self.gamma


@dataclass(frozen=True)
class Staged:
    """Piecewise-constant rates; stage s uses ``rates[s]`` for ``lengths[s]`` steps."""

    rates: tuple
    lengths: tuple

    def __post_init__(self):
        rates = tuple(float(r) for r in self.rates)
        lengths = tuple(int(n) for n in self.lengths)
        object.__setattr__(self, "rates", rates)
        object.__setattr__(self, "lengths", lengths)
        if len(rates) == 0 or len(rates) != len(lengths):
            raise ValueError("rates and lengths must be non-empty and of equal length")
        if any(r <= 0 for r in rates):
            raise ValueError("stage rates must be positive")
        if any(b > a for a, b in zip(rates, rates[1:])):
            raise ValueError("stage rates must be non-increasing")
        if any(n < 1 for n in lengths):
            raise ValueError("stage lengths must be positive integers")
        object.__setattr__(self, "_ends", tuple(np.cumsum(lengths).tolist()))

    @property
    def n_stages(self) -> int:
        return len(self.rates)

    @property
    def ends(self) -> tuple:
        """Cumulative stage end times T_1, ..., T_S."""
        return self._ends

    @property
    def total(self) -> int:
        return self._ends[-1]

    def stage_of(self, t: int) -> int:
        """Zero-based stage index containing step t (last stage beyond the end)."""
        return min(bisect.bisect_right(self._ends, t), len(self._ends) - 1)

    def rate(self, t: int) -> float:
        return self.rates[self.stage_of(t)]


StepSchedule = Union[PowerLaw, Staged]


def schedule_rate(schedule, t: int) -> float:
    if t < 0:
        raise ValueError(f"t must be non-negative, got {t}")
    return schedule.rate(t)


def staged_schedule_a(F, kappa, E, R, eps_hat, delta_hat):
    """Stage plan that halves the error bound each stage.

    Returns ``(schedule, S)`` with ``S = ceil(log2(F / eps_hat))`` stages,
    rates ``2**-s * F * kappa / (E * log(R S / delta_hat))`` and a common
    stage length ``ceil((2 / kappa**2) * log(R S / delta_hat))``.
    """
    for name, v in (("F", F), ("kappa", kappa), ("E", E), ("R", R), ("eps_hat", eps_hat)):
        if not v > 0:
            raise ValueError(f"{name} must be positive, got {v}")
    if not 0 < delta_hat < 1:
        raise ValueError(f"delta_hat must lie in (0, 1), got {delta_hat}")
    if not eps_hat < F:
        raise ValueError("eps_hat must be smaller than F")
    S = max(1, math.ceil(math.log2(F / eps_hat) - 1e-12))
    log_term = math.log(R * S / delta_hat)
    if log_term <= 0:
        raise ValueError("R * S / delta_hat must exceed 1")
    length = max(1, math.ceil((2.0 / kappa**2) * log_term - 1e-12))
    rates = [2.0 ** (-s) * F * kappa / (E * log_term) for s in range(1, S + 1)]
    return Staged(tuple(rates), (length,) * S), S


def staged_schedule_b(a: float, s_max: int) -> Staged:
    """Rates a / (2**s log(s+1)) held for ceil(log(s+1)**2) steps, s = 1..s_max."""
    if not a > 0:
        raise ValueError(f"a must be positive, got {a}")
    if s_max < 1:
        raise ValueError(f"s_max must be at least 1, got {s_max}")
    rates, lengths = [], []
    for s in range(1, s_max + 1):
        lg = math.log(s + 1)
        rates.append(a / (2.0**s * lg))
        lengths.append(max(1, math.ceil(lg * lg)))
    return Staged(tuple(rates), tuple(lengths))


# ---------------------------------------------------------------------------
# Randomness
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class RngStream:
    """Counter-based stream keyed by (master_seed, replication_index)."""

    master_seed: int
    replication_index: int = 0

    def generator(self) -> np.random.Generator:
        seq = np.random.SeedSequence(
            entropy=int(self.master_seed) & (2**64 - 1),
            spawn_key=(int(self.replication_index),),
        )
        return np.random.Generator(np.random.Philox(seq))


def as_generator(rng) -> np.random.Generator:
    if isinstance(rng, np.random.Generator):
        return rng
    if isinstance(rng, RngStream):
        return rng.generator()
    return np.random.default_rng(rng)


# ---------------------------------------------------------------------------
# Problems
# ---------------------------------------------------------------------------


@dataclass
class Problem:
    """An optimisation instance: oracles, samplers, feasible set and optimum.

    ``value_noise(rng)`` draws one noise realisation w and ``noisy_value(X, w)``
    evaluates l(x, w) for each row of X; Kiefer-Wolfowitz probes share w
    across coordinates this way.
    """

    name: str
    dimension: int
    objective: Callable[[np.ndarray], float]
    sample_grad: Callable[[np.ndarray, np.random.Generator, int], np.ndarray]
    feasible: object
    grad: Optional[Callable[[np.ndarray], np.ndarray]] = None
    value_noise: Optional[Callable[[np.random.Generator], object]] = None
    noisy_value: Optional[Callable[[np.ndarray, object], np.ndarray]] = None
    optimum: Optional[np.ndarray] = None
    distance_oracle: Optional[Callable[[np.ndarray], float]] = None
    opt_value: Optional[float] = None
    x0: Optional[np.ndarray] = None
    kappa: Optional[float] = None
    curvature: Optional[float] = None
    sigma: Optional[float] = None
    info: dict = field(default_factory=dict)

    def sample_value(self, x, rng) -> float:
        if self.value_noise is None or self.noisy_value is None:
            raise NotImplementedError(f"{self.name} has no noisy value oracle")
        w = self.value_noise(rng)
        return float(self.noisy_value(np.atleast_2d(x), w)[0])

    def distance(self, x) -> float:
        """Distance from x to the optimum set."""
        if self.distance_oracle is not None:
            return float(self.distance_oracle(x))
        if self.optimum is None:
            return math.nan
        return float(np.linalg.norm(np.asarray(x) - self.optimum))

    def gap(self, x) -> float:
        if self.opt_value is None:
            return math.nan
        return float(self.objective(x)) - self.opt_value

    def initial_point(self) -> np.ndarray:
        if self.x0 is not None:
            return np.array(self.x0, dtype=float)
        return self.feasible.project(np.zeros(self.dimension))


# ---------------------------------------------------------------------------
# Trajectories
# ---------------------------------------------------------------------------


def checkpoint_times(iters: int, dense_until: int = 1000, factor: float = 1.1) -> np.ndarray:
    """Recorded step indices: every t < dense_until, then geometric, always iters."""
    dense = np.arange(min(iters + 1, dense_until))
    times = list(dense)
    t = float(dense_until)
    while t <= iters:
        ti = int(round(t))
        if ti > times[-1]:
            times.append(ti)
        t *= factor
    if times[-1] != iters:
        times.append(iters)
    return np.asarray(times, dtype=np.int64)


@dataclass
class Trajectory:
    t: np.ndarray
    alpha: np.ndarray
    gap: np.ndarray
    dist: np.ndarray
    nontrivial: np.ndarray
    final_x: np.ndarray
    n_steps: int
    n_nontrivial: int
    x: Optional[np.ndarray] = None
    last_nontrivial: int = -1
    extras: dict = field(default_factory=dict)

    def __len__(self):
        return len(self.t)


class TrajectoryRecorder:
    """Accumulates per-step records at checkpoint times with exact counters."""

    def __init__(self, problem: Problem, iters: int, thin: bool = True, keep_x: bool = False):
        self.problem = problem
        self.times = checkpoint_times(iters) if thin else np.arange(iters + 1)
        self._next = 0
        self.keep_x = keep_x
        self.rows = []
        self.xs = []
        self.n_nontrivial = 0
        self.last_nontrivial = -1

    def observe(self, t: int, alpha: float, x: np.ndarray, nontrivial: bool):
        if nontrivial:
            self.n_nontrivial += 1
            self.last_nontrivial = t
        if self._next < len(self.times) and self.times[self._next] == t:
            self._next += 1
            x = np.asarray(x, dtype=float)
            if not np.all(np.isfinite(x)):
                raise FloatingPointError(f"non-finite iterate at t={t}")
            self.rows.append((t, alpha, self.problem.gap(x), self.problem.distance(x), bool(nontrivial)))
            if self.keep_x:
                self.xs.append(x.copy())

    def finish(self, x_final: np.ndarray, n_steps: int) -> Trajectory:
        cols = list(zip(*self.rows)) if self.rows else [[]] * 5
        return Trajectory(
            t=np.asarray(cols[0], dtype=np.int64),
            alpha=np.asarray(cols[1], dtype=float),
            gap=np.asarray(cols[2], dtype=float),
            dist=np.asarray(cols[3], dtype=float),
            nontrivial=np.asarray(cols[4], dtype=bool),
            final_x=np.array(x_final, dtype=float),
            n_steps=n_steps,
            n_nontrivial=self.n_nontrivial,
            x=np.asarray(self.xs) if self.keep_x else None,
            last_nontrivial=self.last_nontrivial,
        )


def alpha_regularity(schedule: PowerLaw, t_max: int = 10**6, n_points: int = 200) -> dict:
    """Numerical look at the learning-rate regularity conditions.

    Returns the minimum of alpha_{2t}/alpha_t and the relative decrement
    (alpha_t - alpha_{t+1})/alpha_t at the last checked t.
    """
    ts = np.unique(np.geomspace(1, t_max, n_points).astype(np.int64))
    rates = np.array([schedule.rate(int(t)) for t in ts])
    doubled = np.array([schedule.rate(int(2 * t)) for t in ts])
    nxt = np.array([schedule.rate(int(t) + 1) for t in ts])
    rel = (rates - nxt) / rates
    return {"min_ratio_2t": float(np.min(doubled / rates)), "rel_decrement": rel, "t": ts}


def as_vector(x: Sequence[float]) -> np.ndarray:
    v = np.asarray(x, dtype=float)
    if v.ndim != 1 or v.size < 1:
        raise ValueError("expected a non-empty 1-d vector")
    if not np.all(np.isfinite(v)):
        raise ValueError("vector has non-finite coordinates")
    return v

"""PSGD, Kiefer-Wolfowitz, stochastic Frank-Wolfe and the bandit variant.

Every step function is pure given its generator; ``run`` drives a step
function over a schedule and records a :class:`~sharpsa.core.Trajectory`.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, replace
from typing import Optional, Union

import numpy as np

from .core import Problem, Staged, Trajectory, TrajectoryRecorder, as_generator, schedule_rate
from .projections import MissingLmo, project_simplex


class StepError(RuntimeError):
    """An algorithm step failed; ``iteration`` is the step index."""

    def __init__(self, iteration: int, cause: BaseException):
        super().__init__(f"step {iteration} failed: {cause}")
        self.iteration = iteration
        self.cause = cause


class DegenerateDistribution(RuntimeError):
    pass


class NuThresholdWarning(UserWarning):
    pass


def nu_threshold(kappa: float, curvature: float) -> float:
    """Largest finite-difference width for which the KW concentration result applies."""
    return math.sqrt(kappa / (3.0 * curvature))


def _warn_nu(nu, kappa, curvature):
    if kappa is not None and curvature is not None and curvature > 0:
        limit = nu_threshold(kappa, curvature)
        if nu > limit:
            warnings.warn(
                f"nu={nu} exceeds sqrt(kappa/3c)={limit:.4g}; the concentration guarantee does not apply",
                NuThresholdWarning,
                stacklevel=3,
            )


@dataclass(frozen=True)
class PsgdConfig:
    schedule: object
    batch: int = 1

    def __post_init__(self):
        if self.batch < 1:
            raise ValueError("batch must be at least 1")


@dataclass(frozen=True)
class KwConfig:
    schedule: object
    nu: float
    shared_noise: bool = True
    kappa: Optional[float] = None
    curvature: Optional[float] = None

    def __post_init__(self):
        if not self.nu > 0:
            raise ValueError("nu must be positive")
        _warn_nu(self.nu, self.kappa, self.curvature)


@dataclass(frozen=True)
class SfwConfig:
    """``batch_rule`` is ``"auto"`` (m_t = ceil((3 sigma / (kappa alpha_t))**2)) or a fixed int."""

    schedule: object
    sigma: float = 1.0
    kappa: float = 1.0
    batch_rule: Union[str, int] = "auto"

    def __post_init__(self):
        if self.batch_rule != "auto" and (not isinstance(self.batch_rule, int) or self.batch_rule < 1):
            raise ValueError(f"batch_rule must be 'auto' or a positive int, got {self.batch_rule!r}")

    def batch_size(self, alpha: float) -> int:
        if self.batch_rule == "auto":
            return max(1, math.ceil((3.0 * self.sigma / (self.kappa * alpha)) ** 2 - 1e-9))
        return int(self.batch_rule)


@dataclass(frozen=True)
class MabConfig:
    schedule: object


# ---------------------------------------------------------------------------
# Steps
# ---------------------------------------------------------------------------


def psgd_step(problem: Problem, x, alpha: float, batch: int, rng):
    c = problem.sample_grad(x, rng, batch)
    y = x - alpha * c
    nontrivial = not problem.feasible.contains(y)
    x_new = problem.feasible.project(y) if nontrivial else y
    return x_new, nontrivial


def kw_gradient(problem: Problem, x, nu: float, rng, shared_noise: bool = True) -> np.ndarray:
    """Central differences l(x + nu e_i, w+) - l(x - nu e_i, w-) over 2 nu."""
    x = np.asarray(x, dtype=float)
    d = x.size
    shift = nu * np.eye(d)
    plus, minus = x + shift, x - shift
    if shared_noise:
        w_plus, w_minus = problem.value_noise(rng), problem.value_noise(rng)
        f_plus = problem.noisy_value(plus, w_plus)
        f_minus = problem.noisy_value(minus, w_minus)
    else:
        f_plus = np.array([problem.noisy_value(plus[i : i + 1], problem.value_noise(rng))[0] for i in range(d)])
        f_minus = np.array([problem.noisy_value(minus[i : i + 1], problem.value_noise(rng))[0] for i in range(d)])
    return (np.asarray(f_plus) - np.asarray(f_minus)) / (2.0 * nu)


def kw_step(problem: Problem, x, alpha: float, nu: float, rng, shared_noise: bool = True):
    c = kw_gradient(problem, x, nu, rng, shared_noise)
    y = x - alpha * c
    nontrivial = not problem.feasible.contains(y)
    x_new = problem.feasible.project(y) if nontrivial else y
    return x_new, nontrivial


def sfw_step(problem: Problem, x, alpha: float, m: int, rng):
    if not 0 < alpha <= 1:
        raise ValueError(f"Frank-Wolfe step needs alpha in (0, 1], got {alpha}")
    if not problem.feasible.has_lmo:
        raise MissingLmo(f"feasible set of {problem.name} has no LMO")
    c = problem.sample_grad(x, rng, m)
    v = problem.feasible.lmo(c)
    return (1.0 - alpha) * x + alpha * v


def mab_step(p, alpha: float, cost_sampler, rng):
    """Importance-sampled bandit step on the simplex.

    Returns ``(p_next, arm, clipped)`` where ``clipped`` reports whether
    coordinates below 1e-12 were zeroed and the rest renormalised first.
    """
    p = np.asarray(p, dtype=float)
    clipped = bool(np.any((p > 0) & (p < 1e-12)))
    if clipped:
        p = np.where(p < 1e-12, 0.0, p)
        p = p / p.sum()
    cdf = np.cumsum(p)
    arm = min(int(np.searchsorted(cdf, rng.random() * cdf[-1], side="right")), p.size - 1)
    while p[arm] == 0:  # guard against landing on a zero-width cell at the top end
        arm -= 1
    if alpha == 0:
        return p.copy(), arm, clipped
    cost = cost_sampler(arm, rng)
    y = p.copy()
    y[arm] -= alpha * cost / p[arm]
    return project_simplex(y), arm, clipped


# ---------------------------------------------------------------------------
# Drivers
# ---------------------------------------------------------------------------


def run(problem: Problem, config, iters: int, rng, thin: bool = True, keep_x: bool = False, x0=None) -> Trajectory:
    """Run ``iters`` steps of the algorithm selected by ``config``."""
    gen = as_generator(rng)
    schedule = config.schedule
    x = problem.initial_point() if x0 is None else np.array(x0, dtype=float)
    rec = TrajectoryRecorder(problem, iters, thin=thin, keep_x=keep_x)
    rec.observe(0, schedule_rate(schedule, 0), x, False)
    extras = {}

    if isinstance(config, PsgdConfig):

        def step(x, alpha):
            return psgd_step(problem, x, alpha, config.batch, gen)

    elif isinstance(config, KwConfig):
        _warn_nu(config.nu, problem.kappa, problem.curvature)

        def step(x, alpha):
            return kw_step(problem, x, alpha, config.nu, gen, config.shared_noise)

    elif isinstance(config, SfwConfig):
        extras["samples"] = 0

        def step(x, alpha):
            m = config.batch_size(alpha)
            extras["samples"] += m
            return sfw_step(problem, x, alpha, m, gen), False

    elif isinstance(config, MabConfig):
        sampler = problem.info["arm_cost"]
        extras["clipped"] = 0
        extras["arms"] = np.zeros(problem.dimension, dtype=np.int64)

        def step(x, alpha):
            p, arm, clipped = mab_step(x, alpha, sampler, gen)
            extras["clipped"] += int(clipped)
            extras["arms"][arm] += 1
            return p, True

    else:
        raise TypeError(f"unknown algorithm config {type(config).__name__}")

    for t in range(iters):
        alpha = schedule_rate(schedule, t)
        try:
            x, nontrivial = step(x, alpha)
        except Exception as exc:  # noqa: BLE001 - re-raised with the step index
            raise StepError(t, exc) from exc
        rec.observe(t + 1, schedule_rate(schedule, t + 1), x, nontrivial)

    traj = rec.finish(x, iters)
    traj.extras.update(extras)
    return traj


@dataclass
class StagedResult:
    trajectory: Trajectory
    errors: np.ndarray  # optimality gap at t = 0 and at every stage end
    ratios: np.ndarray  # errors[s] / errors[s-1], s = 1..S
    dist_errors: np.ndarray  # distance to the optimum at the same times

    @property
    def log2_slope(self) -> float:
        """Least-squares slope of log2 error against stage index."""
        err = self.errors[1:]
        ok = err > 0
        if ok.sum() < 2:
            return math.nan
        s = np.arange(1, err.size + 1)[ok]
        return float(np.polyfit(s, np.log2(err[ok]), 1)[0])


def run_staged(problem: Problem, config, staged: Staged, rng, x0=None) -> StagedResult:
    """Run over a staged schedule and report end-of-stage errors."""
    if not isinstance(staged, Staged):
        raise TypeError("run_staged needs a Staged schedule")
    cfg = replace(config, schedule=staged)
    traj = run(problem, cfg, staged.total, rng, thin=False, x0=x0)
    ends = np.concatenate([[0], np.asarray(staged.ends)])
    errors = traj.gap[ends]
    with np.errstate(divide="ignore", invalid="ignore"):
        ratios = errors[1:] / errors[:-1]
    return StagedResult(traj, errors, ratios, traj.dist[ends])


def psgd_ensemble(problem: Problem, config: PsgdConfig, iters: int, reps: int, rng, x0=None, record=()):
    """Run ``reps`` PSGD chains in lock-step with array operations.

    Needs ``problem.info["grad_rows"]`` (exact gradients of a row stack),
    Gaussian gradient noise of scale ``problem.sigma`` and a feasible set
    with ``project_rows``.  All chains draw from the single generator
    ``rng``, so results match the per-replication driver in law but not
    path by path.  Returns the final iterates (reps, d) and a dict of
    iterate stacks at the step indices listed in ``record``.
    """
    grad_rows = problem.info.get("grad_rows")
    project_rows = getattr(problem.feasible, "project_rows", None)
    if grad_rows is None or project_rows is None or problem.sigma is None:
        raise TypeError(f"{problem.name} does not support the vectorised driver")
    gen = as_generator(rng)
    start = problem.initial_point() if x0 is None else np.asarray(x0, dtype=float)
    X = np.tile(start, (reps, 1))
    noise_sd = problem.sigma / math.sqrt(config.batch)
    wanted = set(int(t) for t in record)
    snaps = {0: X.copy()} if 0 in wanted else {}
    for t in range(iters):
        alpha = schedule_rate(config.schedule, t)
        C = grad_rows(X) + noise_sd * gen.standard_normal(X.shape)
        X = project_rows(X - alpha * C)
        if t + 1 in wanted:
            snaps[t + 1] = X.copy()
    return X, snaps

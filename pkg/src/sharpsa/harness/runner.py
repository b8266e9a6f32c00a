"""Seeded replications, CSV output, slope fits and the tail-rate experiment."""

from __future__ import annotations

import csv
import json
import math
import subprocess
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional, Sequence

import numpy as np

from .. import __version__
from ..algorithms import PsgdConfig, StepError, psgd_ensemble, run, run_staged
from ..core import PowerLaw, RngStream, Staged, as_generator
from ..problems import make_problem
from .config import ExperimentConfig
from .fitting import InsufficientData, fit_loglog, fit_tail

TRAJECTORY_HEADER = ("rep", "t", "alpha", "gap", "dist", "nontrivial_proj")
AGGREGATE_HEADER = ("t", "mean_dist", "se_dist", "mean_gap", "se_gap")


class FailureRateExceeded(RuntimeError):
    def __init__(self, failures: int, total: int, limit: float):
        super().__init__(f"{failures} of {total} replications failed (limit {limit:.0%})")
        self.failures = failures
        self.total = total


class OutputError(OSError):
    """Writing results failed; ``path`` names the offending file."""

    def __init__(self, path, cause: OSError):
        super().__init__(f"cannot write {path}: {cause.strerror or cause}")
        self.path = Path(path)
        self.cause = cause


def fmt(v) -> str:
    """17 significant digits, enough to round-trip a double."""
    if isinstance(v, (bool, np.bool_)):
        return "1" if v else "0"
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    return format(float(v), ".17g")


def version_string() -> str:
    try:
        out = subprocess.run(
            ["git", "describe", "--always", "--dirty", "--tags"],
            cwd=Path(__file__).resolve().parent,
            capture_output=True,
            text=True,
            timeout=5,
        )
        if out.returncode == 0 and out.stdout.strip():
            return f"{__version__}+g{out.stdout.strip()}"
    except (OSError, subprocess.SubprocessError):
        pass
    return __version__


# ---------------------------------------------------------------------------
# Replications
# ---------------------------------------------------------------------------


@dataclass
class RepOutcome:
    rep: int
    trajectory: object = None
    error: Optional[str] = None


def _run_rep(problem, algorithm, cfg: ExperimentConfig, rep: int) -> RepOutcome:
    try:
        traj = run(problem, algorithm, cfg.iters, RngStream(cfg.master_seed, rep), thin=cfg.thin)
    except (StepError, ArithmeticError, ValueError, np.linalg.LinAlgError) as exc:
        return RepOutcome(rep, error=f"{type(exc).__name__}: {exc}")
    return RepOutcome(rep, trajectory=traj)


def run_replications(cfg: ExperimentConfig, problem=None) -> list:
    """All replications, ordered by index whatever the thread count."""
    problem = problem if problem is not None else make_problem(cfg.problem, **cfg.problem_params)
    algorithm = cfg.build_algorithm()
    reps = range(cfg.replications)
    if cfg.threads == 1:
        return [_run_rep(problem, algorithm, cfg, r) for r in reps]
    with ThreadPoolExecutor(max_workers=cfg.threads) as pool:
        return list(pool.map(lambda r: _run_rep(problem, algorithm, cfg, r), reps))


def aggregate(trajectories: Sequence) -> dict:
    """Mean and standard error of gap and dist across replications, per t."""
    if not trajectories:
        raise InsufficientData("no successful replications to aggregate")
    t = trajectories[0].t
    gap = np.vstack([tr.gap for tr in trajectories])
    dist = np.vstack([tr.dist for tr in trajectories])
    n = gap.shape[0]

    def se(a):
        return a.std(axis=0, ddof=1) / math.sqrt(n) if n > 1 else np.zeros(a.shape[1])

    return {"t": t, "mean_dist": dist.mean(axis=0), "se_dist": se(dist), "mean_gap": gap.mean(axis=0), "se_gap": se(gap)}


def _fit_window(cfg: ExperimentConfig) -> tuple:
    # staged runs hit a noise floor in their last decade
    schedule = cfg.build_schedule()
    t_max = cfg.iters / 10.0 if isinstance(schedule, Staged) else math.inf
    return cfg.fit_t_min, t_max


def _write_csv(path: Path, header, rows):
    try:
        with path.open("w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(header)
            w.writerows(rows)
    except OSError as exc:
        raise OutputError(path, exc) from exc


@dataclass
class RunReport:
    config: ExperimentConfig
    output_dir: Path
    fit: Optional[object]
    fit_error: Optional[str]
    failures: list
    n_success: int
    wall_time: float
    version: str
    aggregate: dict = field(repr=False, default_factory=dict)

    def to_dict(self) -> dict:
        return {
            "fit": self.fit.to_dict() if self.fit is not None else None,
            "fit_error": self.fit_error,
            "fit_quantity": self.config.fit_quantity,
            "replications": self.config.replications,
            "successful": self.n_success,
            "failures": self.failures,
            "wall_time_s": self.wall_time,
            "version": self.version,
            "config": self.config.to_dict(),
        }


def run_experiment(cfg: ExperimentConfig, output_dir=None, problem=None) -> RunReport:
    """Run every replication, write the CSVs and ``fit.json``.

    Raises :class:`FailureRateExceeded` after writing when too many
    replications errored, and :class:`OutputError` on I/O problems.
    """
    start = time.perf_counter()
    out = Path(output_dir) if output_dir is not None else cfg.resolved_output_dir()
    try:
        out.mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        raise OutputError(out, exc) from exc

    outcomes = run_replications(cfg, problem)
    good = [o for o in outcomes if o.error is None]
    failures = [{"rep": o.rep, "error": o.error} for o in outcomes if o.error is not None]

    if cfg.write_trajectories:
        rows = (
            (fmt(o.rep), fmt(t), fmt(a), fmt(g), fmt(d), fmt(bool(nt)))
            for o in good
            for t, a, g, d, nt in zip(o.trajectory.t, o.trajectory.alpha, o.trajectory.gap, o.trajectory.dist, o.trajectory.nontrivial)
        )
        _write_csv(out / "trajectories.csv", TRAJECTORY_HEADER, rows)

    agg, fit, fit_error = {}, None, None
    if good:
        agg = aggregate([o.trajectory for o in good])
        cols = [agg[k] for k in AGGREGATE_HEADER]
        _write_csv(out / "aggregate.csv", AGGREGATE_HEADER, ([fmt(v) for v in row] for row in zip(*cols)))
        t_min, t_max = _fit_window(cfg)
        try:
            fit = fit_loglog(agg["t"], agg["mean_" + cfg.fit_quantity], t_min=t_min, t_max=t_max)
        except InsufficientData as exc:
            fit_error = str(exc)
    else:
        fit_error = "every replication failed"

    report = RunReport(cfg, out, fit, fit_error, failures, len(good), time.perf_counter() - start, version_string(), agg)
    path = out / "fit.json"
    try:
        path.write_text(json.dumps(report.to_dict(), indent=2, sort_keys=True, default=_json_default) + "\n")
    except OSError as exc:
        raise OutputError(path, exc) from exc
    if len(failures) > cfg.max_failure_rate * cfg.replications:
        raise FailureRateExceeded(len(failures), cfg.replications, cfg.max_failure_rate)
    return report


def _json_default(v):
    if isinstance(v, np.ndarray):
        return v.tolist()
    if isinstance(v, np.generic):
        return v.item()
    if isinstance(v, (tuple, set)):
        return list(v)
    return str(v)


# ---------------------------------------------------------------------------
# Staged runs
# ---------------------------------------------------------------------------


@dataclass
class LinearReport:
    stage_ends: np.ndarray
    mean_errors: np.ndarray  # mean gap at t = 0 and each stage end
    ratios: np.ndarray
    mean_log2_errors: np.ndarray
    log2_slope: float
    flagged: list  # stage numbers (1-based) with ratio above the threshold
    per_rep_errors: np.ndarray
    failures: int

    def mean_ratio(self, stages: Optional[int] = None) -> float:
        r = self.ratios if stages is None else self.ratios[:stages]
        return float(np.mean(r))

    def to_dict(self) -> dict:
        return {
            "stage_ends": self.stage_ends.tolist(),
            "mean_errors": self.mean_errors.tolist(),
            "ratios": self.ratios.tolist(),
            "mean_log2_errors": self.mean_log2_errors.tolist(),
            "log2_slope": self.log2_slope,
            "flagged": self.flagged,
            "failures": self.failures,
        }


def run_linear_convergence(cfg: ExperimentConfig, problem=None, flag_above: float = 0.75, quantity: str = "gap") -> LinearReport:
    """Per-stage end errors for a staged schedule, averaged over replications."""
    staged = cfg.build_schedule()
    if not isinstance(staged, Staged):
        raise TypeError("run_linear_convergence needs a staged schedule")
    problem = problem if problem is not None else make_problem(cfg.problem, **cfg.problem_params)
    algorithm = cfg.build_algorithm()
    errs, failures = [], 0
    for rep in range(cfg.replications):
        try:
            res = run_staged(problem, algorithm, staged, RngStream(cfg.master_seed, rep))
        except (StepError, ArithmeticError, ValueError):
            failures += 1
            continue
        errs.append(res.errors if quantity == "gap" else res.dist_errors)
    if not errs:
        raise InsufficientData("every replication failed")
    errs = np.vstack(errs)
    mean = errs.mean(axis=0)
    with np.errstate(divide="ignore", invalid="ignore"):
        ratios = mean[1:] / mean[:-1]
        log2 = np.log2(np.where(errs > 0, errs, np.nan))
    mean_log2 = np.nanmean(log2, axis=0)
    s = np.arange(1, mean.size)
    ok = np.isfinite(mean_log2[1:])
    slope = float(np.polyfit(s[ok], mean_log2[1:][ok], 1)[0]) if ok.sum() >= 2 else math.nan
    flagged = [int(k + 1) for k in np.flatnonzero(ratios > flag_above)]
    return LinearReport(np.asarray(staged.ends), mean, ratios, mean_log2, slope, flagged, errs, failures)


# ---------------------------------------------------------------------------
# Tail rate against step size
# ---------------------------------------------------------------------------


def stationary_samples(problem, alpha: float, iters: int, reps: int, rng, batch: int = 1, quantity: str = "gap") -> np.ndarray:
    """Constant-step PSGD states after ``iters`` steps, one per replication.

    ``quantity`` is "gap", "dist" or "x" (first coordinate of the iterate).
    """
    config = PsgdConfig(PowerLaw(alpha, 1.0, 0.0), batch=batch)
    gen = as_generator(rng)
    try:
        X, _ = psgd_ensemble(problem, config, iters, reps, gen)
    except TypeError:
        X = np.vstack([run(problem, config, iters, gen, thin=True).final_x for _ in range(reps)])
    if quantity == "x":
        return X[:, 0].copy()
    if quantity == "dist":
        return np.array([problem.distance(x) for x in X])
    if quantity == "gap":
        return np.array([problem.gap(x) for x in X])
    raise ValueError(f"unknown quantity {quantity!r}")


@dataclass
class TailScaling:
    alphas: np.ndarray
    J_hat: np.ndarray
    r2: np.ndarray
    ratios: np.ndarray  # J_hat[k+1] / J_hat[k]
    log_slope: Optional[float]  # slope of log J_hat on log alpha
    passed: Optional[bool]  # None with fewer than two step sizes

    @property
    def rates(self) -> np.ndarray:
        """Exponential decay rate of the tail, J_hat / alpha."""
        return self.J_hat / self.alphas

    def rows(self):
        return list(zip(self.alphas.tolist(), self.J_hat.tolist(), self.rates.tolist(), self.r2.tolist()))


def scaling_verdict(alphas, J_hat, r2=None, ratio_band=(0.7, 1.4), slope_band=(-0.25, 0.25)) -> TailScaling:
    alphas = np.asarray(alphas, dtype=float)
    J_hat = np.asarray(J_hat, dtype=float)
    r2 = np.full(alphas.size, np.nan) if r2 is None else np.asarray(r2, dtype=float)
    if alphas.size < 2:
        return TailScaling(alphas, J_hat, r2, np.array([]), None, None)
    ratios = J_hat[1:] / J_hat[:-1]
    slope = float(np.polyfit(np.log(alphas), np.log(J_hat), 1)[0])
    passed = bool(
        np.all((ratios >= ratio_band[0]) & (ratios <= ratio_band[1])) and slope_band[0] <= slope <= slope_band[1]
    )
    return TailScaling(alphas, J_hat, r2, ratios, slope, passed)


def tail_rate_scaling(
    problem,
    alphas: Sequence[float],
    reps: int = 10_000,
    iters: int = 10_000,
    rng=0,
    quantity: str = "gap",
    problem_params: Optional[dict] = None,
) -> TailScaling:
    """Fit the exponential tail of the stationary law at each step size.

    A tail decaying like exp(-(J / alpha) z) with J free of alpha gives a
    rate that grows like 1 / alpha.
    """
    if isinstance(problem, str):
        problem = make_problem(problem, **(problem_params or {}))
    gen = as_generator(rng)
    J, r2 = [], []
    for a in alphas:
        fit = fit_tail(stationary_samples(problem, a, iters, reps, gen, quantity=quantity), a)
        J.append(fit.J_hat)
        r2.append(fit.r2)
    return scaling_verdict(alphas, J, r2)

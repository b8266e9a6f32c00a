"""Regression fits for convergence slopes and exponential tails."""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field

import numpy as np


class InsufficientData(ValueError):
    pass


@dataclass
class SlopeFit:
    slope: float
    intercept: float
    r2: float
    t_range: tuple
    n_points: int
    n_dropped: int = 0

    def to_dict(self):
        return asdict(self)


def _ols(x, y):
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    xm, ym = x.mean(), y.mean()
    sxx = np.sum((x - xm) ** 2)
    if sxx == 0:
        raise InsufficientData("regressor has no spread")
    slope = np.sum((x - xm) * (y - ym)) / sxx
    intercept = ym - slope * xm
    ss_res = np.sum((y - intercept - slope * x) ** 2)
    ss_tot = np.sum((y - ym) ** 2)
    # a flat series leaves only rounding noise in ss_tot
    flat = ss_tot <= (64 * np.finfo(float).eps) ** 2 * y.size * max(1.0, ym * ym)
    r2 = 1.0 if flat else 1.0 - ss_res / ss_tot
    return float(slope), float(intercept), float(min(1.0, max(0.0, r2)))


def fit_loglog(t, values, t_min: float = 100, t_max: float = math.inf, log_bins: int = 0) -> SlopeFit:
    """OLS of log(value) on log(t) over t_min <= t <= t_max.

    Non-positive values are dropped and counted.  With ``log_bins > 0`` the
    points are first averaged within that many log-spaced bins so a dense
    early stretch does not dominate the fit.
    """
    t = np.asarray(t, dtype=float)
    v = np.asarray(values, dtype=float)
    window = (t >= t_min) & (t <= t_max) & (t > 0) & np.isfinite(v)
    t, v = t[window], v[window]
    positive = v > 0
    dropped = int((~positive).sum())
    t, v = t[positive], v[positive]
    if t.size < 10:
        raise InsufficientData(f"need at least 10 positive points after t_min, have {t.size}")
    lt, lv = np.log(t), np.log(v)
    if log_bins:
        edges = np.linspace(lt.min(), lt.max() + 1e-12, log_bins + 1)
        which = np.digitize(lt, edges) - 1
        keep = [k for k in range(log_bins) if np.any(which == k)]
        lt = np.array([lt[which == k].mean() for k in keep])
        lv = np.array([np.log(v[which == k].mean()) for k in keep])
    slope, intercept, r2 = _ols(lt, lv)
    return SlopeFit(slope, intercept, r2, (float(t.min()), float(t.max())), int(t.size), dropped)


def empirical_ccdf(samples, z):
    """P(X >= z) for each z."""
    s = np.sort(np.asarray(samples, dtype=float))
    z = np.asarray(z, dtype=float)
    return 1.0 - np.searchsorted(s, z, side="left") / s.size


@dataclass
class TailFit:
    J_hat: float
    r2: float
    slope: float
    window: tuple
    n_points: int
    extra: dict = field(default_factory=dict)


def fit_tail(samples, alpha_t: float, quantiles=(0.5, 0.99), n_grid: int = 50) -> TailFit:
    """Exponential tail fit: OLS of log CCDF on z between two quantiles.

    The rate estimate is J_hat = -slope * alpha_t, so that the tail behaves
    like exp(-(J_hat / alpha_t) z).
    """
    s = np.asarray(samples, dtype=float)
    if s.size < 1000:
        raise InsufficientData(f"tail fit needs at least 1000 samples, got {s.size}")
    lo, hi = np.quantile(s, quantiles)
    if not hi > lo:
        raise InsufficientData("quantile window is degenerate")
    z = np.linspace(lo, hi, n_grid)
    ccdf = empirical_ccdf(s, z)
    keep = ccdf > 0
    slope, intercept, r2 = _ols(z[keep], np.log(ccdf[keep]))
    return TailFit(-slope * alpha_t, r2, slope, (float(lo), float(hi)), int(keep.sum()))


def skewness(samples) -> float:
    s = np.asarray(samples, dtype=float)
    d = s - s.mean()
    m2 = np.mean(d**2)
    return float(np.mean(d**3) / m2**1.5) if m2 > 0 else 0.0


def is_symmetric(samples, tol: float = 0.1) -> tuple:
    """Symmetry check on the standardised sample: |skewness| <= tol.

    Returns (passed, skewness).  The standard error of the sample skewness
    is about sqrt(6/n), so tol = 0.1 is roughly four of them at n = 10^4.
    """
    g = skewness(samples)
    return abs(g) <= tol, g

"""Numerical checks of the drift, noise and sharpness conditions, and the
closed-form constants behind the exponential tail bound.

Condition names follow the usual labels:

* D1  non-vanishing gradient toward the optimum (kappa_hat), with the
      sharpness form gap / dist reported alongside;
* D2  sub-exponential gradient noise (MGF of |c_t|);
* D3  finite-difference bias of order nu^2 (Kiefer-Wolfowitz);
* C1  one-step drift of the Lyapunov quantity, E[f(x+) - f(x)] <= -2 alpha kappa
      whenever f(x) - f* >= alpha B;
* C2  increments bounded by alpha Y with Y sub-exponential.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field
from typing import Optional

import numpy as np

from .algorithms import KwConfig, PsgdConfig, SfwConfig, kw_step, psgd_step, sfw_step
from .core import PowerLaw, Problem, as_generator, schedule_rate
from .projections import Ball, Box, Halfspace, Intersection, NonnegOrthant, Polytope, Simplex


class NoGradient(ValueError):
    pass


class AllOptimal(ValueError):
    """Every vertex is optimal, so the polytope constant is undefined."""


class InsufficientStates(RuntimeError):
    pass


class InvalidRegime(ValueError):
    pass


@dataclass
class ConditionReport:
    condition: str
    estimate: float
    threshold: float
    passed: bool
    n_samples: int
    se: float = 0.0
    details: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        out = asdict(self)
        out["details"] = {k: _jsonable(v) for k, v in self.details.items()}
        return out


def _jsonable(v):
    if isinstance(v, np.ndarray):
        return v.tolist()
    if isinstance(v, (np.floating, np.integer)):
        return v.item()
    if isinstance(v, dict):
        return {k: _jsonable(w) for k, w in v.items()}
    if isinstance(v, (list, tuple)):
        return [_jsonable(w) for w in v]
    return v


# ---------------------------------------------------------------------------
# Sampling feasible states
# ---------------------------------------------------------------------------


def sample_feasible(problem: Problem, n: int, rng) -> np.ndarray:
    """n feasible points: the problem's own sampler if it has one, else the set's."""
    gen = as_generator(rng)
    sampler = problem.info.get("sampler")
    if sampler is not None:
        return np.asarray(sampler(gen, n), dtype=float)
    return problem.feasible.sample(gen, n)


def _optimum_point(problem: Problem) -> np.ndarray:
    if problem.optimum is None:
        raise ValueError(f"{problem.name} has no optimum point")
    return np.asarray(problem.optimum, dtype=float)


# ---------------------------------------------------------------------------
# D1: sharpness
# ---------------------------------------------------------------------------


def _kappa_at(problem, x, x_star, exclude):
    r = x - x_star
    d = float(np.sqrt(r @ r))
    if d <= exclude:
        return None
    return float(problem.grad(x) @ r) / d, problem.gap(x), d


def local_probe(problem: Problem, rng=None, n_dirs: int = 200, radii=None, exclude: float = 1e-9) -> tuple:
    """Minimum directional derivative on shrinking shells around the optimum.

    Points are x* + rho d projected back onto the set and kept at distance
    between rho / 2 and rho from x*.  Half the directions
    are uniform; the other half perturb the worst offset found on the previous
    shell, so a thin flat direction is followed down once it is found.
    Returns ``(radii, kappa_min, raw_min)``.  For a sharp problem kappa_min
    stays bounded away from zero as rho shrinks, while a vanishing gradient
    makes it shrink in proportion to rho.  ``raw_min`` is the minimum over
    every probe point before the distance filter.
    """
    gen = as_generator(rng)
    x_star = _optimum_point(problem)
    scale = problem.feasible.diameter or 1.0
    radii = scale * np.geomspace(1e-1, 1e-5, 5) if radii is None else np.asarray(radii, dtype=float)
    out, raw_min = [], []
    worst = None
    for rho in radii:
        dirs = gen.standard_normal((n_dirs, x_star.size))
        if worst is not None:
            half = n_dirs // 2
            dirs[:half] = worst + 0.1 * dirs[:half]
        dirs /= np.linalg.norm(dirs, axis=1, keepdims=True)
        best, best_u, raw = math.inf, None, math.inf
        for d in dirs:
            x = problem.feasible.project(x_star + rho * d)
            k = _kappa_at(problem, x, x_star, exclude * scale)
            if k is None:
                continue
            raw = min(raw, k[0])
            # keep the shell honest: pull far points back along the (feasible)
            # segment to x*, drop points the projection returned close to x*
            if k[2] < 0.5 * rho:
                continue
            if k[2] > rho:
                x = x_star + (rho / k[2]) * (x - x_star)
                k = _kappa_at(problem, x, x_star, exclude * scale)
            if k[0] < best:
                best, best_u = k[0], (x - x_star) / k[2]
        out.append(best if best_u is not None else math.nan)
        raw_min.append(raw if math.isfinite(raw) else math.nan)
        if best_u is not None:
            worst = best_u
    return radii, np.array(out), np.array(raw_min)


def check_sharpness(
    problem: Problem,
    n_samples: int = 2000,
    rng=None,
    exclude: float = 1e-6,
    points=None,
    probe: bool = True,
    vanish_slope: float = 0.5,
) -> ConditionReport:
    """kappa_hat = min grad(x).(x - x*)/|x - x*| over sampled feasible x.

    Points within ``exclude`` of the optimum are dropped.  The report also
    carries the sharpness form min (l(x) - l*)/|x - x*| and whether
    gap >= (kappa_hat / 2) dist holds at every sampled point.

    With ``probe`` the minimum is also taken over shells shrinking toward
    the optimum (see :func:`local_probe`).  The check fails when, over the
    three innermost shells, log kappa falls with log rho at a slope of at
    least ``vanish_slope`` (1 for a smooth interior minimum): a finite sample
    alone always gives kappa_hat > 0.
    """
    if problem.grad is None:
        raise NoGradient(f"{problem.name} has no exact gradient")
    gen = as_generator(rng)
    x_star = _optimum_point(problem)
    pts = sample_feasible(problem, n_samples, gen) if points is None else np.atleast_2d(np.asarray(points, dtype=float))
    rows = [k for k in (_kappa_at(problem, x, x_star, exclude) for x in pts) if k is not None]
    if not rows:
        raise InsufficientStates("every sampled point lies within the exclusion radius")
    kappas, gaps, dists = (np.array(c) for c in zip(*rows))
    k_hat = float(kappas.min())
    details = {"sharpness_form_min": float(np.min(gaps / dists)), "sampled_min": k_hat}
    vanishing = False
    if probe:
        radii, shell, raw = local_probe(problem, gen)
        details.update({"probe_radii": radii, "probe_kappa": shell})
        ok = np.isfinite(shell)
        for vals in (shell, raw):
            if np.isfinite(vals).any():
                k_hat = min(k_hat, float(np.nanmin(vals)))
        inner_r, inner_k = radii[ok][-3:], shell[ok][-3:]
        if inner_k.size >= 2:
            if np.any(inner_k <= 0):
                vanishing = True
            else:
                slope = float(np.polyfit(np.log(inner_r), np.log(inner_k), 1)[0])
                details["probe_slope"] = slope
                vanishing = slope >= vanish_slope
    details["vanishing"] = vanishing
    details["half_kappa_sharpness_holds"] = bool(np.all(gaps >= 0.5 * k_hat * dists - 1e-9))
    return ConditionReport(
        condition="D1",
        estimate=k_hat,
        threshold=0.0,
        passed=bool(k_hat > 0 and not vanishing),
        n_samples=int(kappas.size),
        details=details,
    )


def polytope_sharpness_K(vertices, c_bar, tol: float = 1e-9) -> float:
    """Sharpness constant a / D of a linear objective over a polytope.

    The cost is normalised to unit length and shifted so the optimal value is
    zero; a is the smallest suboptimal vertex value and D the largest distance
    between an optimal and a suboptimal vertex.
    """
    V = np.atleast_2d(np.asarray(vertices, dtype=float))
    c = np.asarray(c_bar, dtype=float)
    if V.size == 0:
        raise ValueError("need at least one vertex")
    norm = np.linalg.norm(c)
    if norm == 0:
        raise AllOptimal("zero cost vector")
    vals = V @ (c / norm)
    vals = vals - vals.min()
    optimal = vals <= tol
    if np.all(optimal):
        raise AllOptimal("objective is constant on the polytope")
    a = float(vals[~optimal].min())
    diff = V[optimal][:, None, :] - V[~optimal][None, :, :]
    D = float(np.sqrt((diff**2).sum(-1)).max())
    return a / D


def interior_margin(feasible, x) -> float:
    """Signed distance from x to the boundary of a set built from simple pieces.

    Positive when x is interior (Condition E2); supports Ball, Box, Halfspace,
    NonnegOrthant and intersections of them.
    """
    x = np.asarray(x, dtype=float)
    if isinstance(feasible, Ball):
        return feasible.radius - float(np.linalg.norm(x - feasible.center))
    if isinstance(feasible, Box):
        return float(min(np.min(x - feasible.lo), np.min(feasible.hi - x)))
    if isinstance(feasible, Halfspace):
        return (feasible.offset - float(feasible.normal @ x)) / math.sqrt(feasible._nn)
    if isinstance(feasible, NonnegOrthant):
        return float(np.min(x))
    if isinstance(feasible, Simplex):
        return float(np.min(x)) if feasible.dim > 1 else 0.0
    if isinstance(feasible, Intersection):
        return min(interior_margin(p, x) for p in feasible.pieces)
    raise TypeError(f"no interior margin for {type(feasible).__name__}")


# ---------------------------------------------------------------------------
# C1: drift
# ---------------------------------------------------------------------------


def _lyapunov(problem: Problem, kind: str):
    if kind == "dist":
        return problem.distance
    if kind == "gap":
        return problem.gap
    raise ValueError(f"lyapunov must be 'dist' or 'gap', got {kind!r}")


def default_lyapunov(config) -> str:
    """Distance for PSGD and KW, optimality gap for Frank-Wolfe."""
    return "gap" if isinstance(config, SfwConfig) else "dist"


def one_step(problem: Problem, config, x, alpha: float, rng) -> np.ndarray:
    if isinstance(config, PsgdConfig):
        return psgd_step(problem, x, alpha, config.batch, rng)[0]
    if isinstance(config, KwConfig):
        return kw_step(problem, x, alpha, config.nu, rng, config.shared_noise)[0]
    if isinstance(config, SfwConfig):
        return sfw_step(problem, x, alpha, config.batch_size(alpha), rng)
    raise TypeError(f"no one-step rule for {type(config).__name__}")


def _states_above(problem, f, threshold, n_states, gen, max_rounds=20):
    states = []
    for _ in range(max_rounds):
        cand = sample_feasible(problem, max(4 * n_states, 64), gen)
        states.extend(x for x in cand if f(x) >= threshold)
        if len(states) >= n_states:
            return np.array(states[:n_states])
    if not states:
        raise InsufficientStates(f"no sampled state has f - f* >= {threshold:.3g}")
    return np.array(states)


def check_drift(
    problem: Problem,
    config,
    kappa: float,
    B: float,
    n_states: int = 50,
    n_inner: int = 2000,
    rng=None,
    alpha: Optional[float] = None,
    lyapunov: Optional[str] = None,
    states=None,
) -> ConditionReport:
    """Monte Carlo check of E[f(x+) - f(x) | x] <= -2 alpha kappa for f(x) - f* >= alpha B.

    Passes when the worst state's mean increment plus two standard errors is
    at most -alpha kappa (a factor-2 slack on the condition).  The reported
    estimate is the worst mean increment divided by -alpha, to be read
    against 2 kappa.
    """
    gen = as_generator(rng)
    kind = lyapunov or default_lyapunov(config)
    f = _lyapunov(problem, kind)
    if alpha is None:
        alpha = schedule_rate(config.schedule, 0)
    if states is None:
        states = _states_above(problem, f, alpha * B, n_states, gen)
    else:
        states = np.atleast_2d(np.asarray(states, dtype=float))
        states = np.array([x for x in states if f(x) >= alpha * B])
        if states.size == 0:
            raise InsufficientStates("no supplied state lies above alpha B")
    means, ses = [], []
    for x in states:
        fx = f(x)
        inc = np.array([f(one_step(problem, config, x, alpha, gen)) - fx for _ in range(n_inner)])
        means.append(inc.mean())
        ses.append(inc.std(ddof=1) / math.sqrt(n_inner))
    means, ses = np.array(means), np.array(ses)
    upper = means + 2.0 * ses
    worst = int(np.argmax(upper))
    passed = bool(upper[worst] <= -alpha * kappa)
    return ConditionReport(
        condition="C1",
        estimate=float(-means[worst] / alpha),
        threshold=2.0 * kappa,
        passed=passed,
        n_samples=int(states.shape[0] * n_inner),
        se=float(ses[worst] / alpha),
        details={
            "lyapunov": kind,
            "alpha": alpha,
            "B": B,
            "worst_state": states[worst],
            "worst_mean_increment": float(means[worst]),
            "margin_per_alpha": float(-upper[worst] / alpha),
            "n_states": int(states.shape[0]),
        },
    )


# ---------------------------------------------------------------------------
# C2 / D2: moment generating functions
# ---------------------------------------------------------------------------


@dataclass
class MgfCurve:
    lambdas: np.ndarray
    D: np.ndarray
    E: np.ndarray
    se_D: np.ndarray
    se_E: np.ndarray
    heavy: np.ndarray  # True where the largest sample carries too much of the mean

    def stable_lambda(self) -> Optional[float]:
        """Largest grid value whose estimate is not dominated by one sample."""
        ok = np.flatnonzero(~self.heavy & np.isfinite(self.D))
        return float(self.lambdas[ok[-1]]) if ok.size else None


def empirical_mgf(samples, lambdas, heavy_share: float = 0.05) -> MgfCurve:
    """Sample means of e^{lambda z} and (e^{lambda z} - 1 - lambda z)/lambda^2."""
    z = np.asarray(samples, dtype=float)
    lam = np.atleast_1d(np.asarray(lambdas, dtype=float))
    if not np.all(np.isfinite(z)):
        raise ValueError("samples must be finite")
    if np.any(lam <= 0):
        raise ValueError("lambda grid must be positive")
    n = z.size
    D, E, sD, sE, heavy = [], [], [], [], []
    for l in lam:
        lz = l * z
        ez = np.exp(lz)
        ee = (np.expm1(lz) - lz) / (l * l)
        D.append(ez.mean())
        E.append(ee.mean())
        sD.append(ez.std(ddof=1) / math.sqrt(n) if n > 1 else 0.0)
        sE.append(ee.std(ddof=1) / math.sqrt(n) if n > 1 else 0.0)
        total = ez.sum()
        heavy.append(bool(n > 1 and np.isfinite(total) and ez.max() / total > heavy_share) or not np.isfinite(total))
    return MgfCurve(lam, np.array(D), np.array(E), np.array(sD), np.array(sE), np.array(heavy))


def increment_samples(problem: Problem, config, alpha: float, states, n_inner: int, rng, lyapunov=None) -> np.ndarray:
    """Y = |f(x+) - f(x)| / alpha over one-step simulations from each state."""
    gen = as_generator(rng)
    f = _lyapunov(problem, lyapunov or default_lyapunov(config))
    out = []
    for x in np.atleast_2d(states):
        fx = f(x)
        out.extend(abs(f(one_step(problem, config, x, alpha, gen)) - fx) / alpha for _ in range(n_inner))
    return np.array(out)


def check_increments(problem, config, kappa, alpha=None, n_states=20, n_inner=500, rng=None, lambdas=None, lyapunov=None) -> ConditionReport:
    """C2: estimate D and E for Z = Y + kappa/2 and pick a stable lambda."""
    gen = as_generator(rng)
    if alpha is None:
        alpha = schedule_rate(config.schedule, 0)
    lambdas = np.geomspace(0.01, 2.0, 12) if lambdas is None else lambdas
    states = sample_feasible(problem, n_states, gen)
    Y = increment_samples(problem, config, alpha, states, n_inner, gen, lyapunov)
    curve = empirical_mgf(Y + kappa / 2.0, lambdas)
    lam = curve.stable_lambda()
    details = {"lambdas": curve.lambdas, "D": curve.D, "E": curve.E, "heavy": curve.heavy, "Y_max": float(Y.max())}
    if lam is None:
        return ConditionReport("C2", math.nan, 0.0, False, int(Y.size), details=details)
    k = int(np.flatnonzero(curve.lambdas == lam)[0])
    details.update({"D_at_lambda": float(curve.D[k]), "E_at_lambda": float(curve.E[k])})
    return ConditionReport("C2", lam, 0.0, True, int(Y.size), se=float(curve.se_D[k]), details=details)


def check_gradient_noise(problem: Problem, n_states: int = 20, n_draws: int = 500, rng=None, lambdas=None) -> ConditionReport:
    """D2: MGF of |c_t| over sampled states."""
    gen = as_generator(rng)
    lambdas = np.geomspace(0.01, 2.0, 12) if lambdas is None else lambdas
    states = sample_feasible(problem, n_states, gen)
    norms = np.array([np.linalg.norm(problem.sample_grad(x, gen, 1)) for x in states for _ in range(n_draws)])
    curve = empirical_mgf(norms, lambdas)
    lam = curve.stable_lambda()
    details = {"lambdas": curve.lambdas, "D": curve.D, "heavy": curve.heavy}
    if lam is None:
        return ConditionReport("D2", math.nan, 0.0, False, int(norms.size), details=details)
    k = int(np.flatnonzero(curve.lambdas == lam)[0])
    return ConditionReport("D2", lam, 0.0, True, int(norms.size), se=float(curve.se_D[k]), details=details)


# ---------------------------------------------------------------------------
# D3: finite-difference bias
# ---------------------------------------------------------------------------


def central_difference(objective, x, nu: float) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    e = nu * np.eye(x.size)
    return np.array([(objective(x + e[i]) - objective(x - e[i])) / (2.0 * nu) for i in range(x.size)])


def check_kw_bias(problem: Problem, points=None, nus=(0.05, 0.1, 0.2, 0.4), rng=None, n_points: int = 10, exact_tol: float = 1e-10) -> ConditionReport:
    """D3: worst bias |grad - central difference| over points, on a nu grid.

    Reports c_hat = max bias / nu^2 and the log-log slope of bias against nu.
    Passes when the slope lies in [1.8, 2.2], or when every bias is below
    ``exact_tol`` (polynomials of degree <= 2, where c = 0).
    """
    if problem.grad is None:
        raise NoGradient(f"{problem.name} has no exact gradient")
    if points is None:
        points = sample_feasible(problem, n_points, rng)
    points = np.atleast_2d(np.asarray(points, dtype=float))
    nus = np.asarray(nus, dtype=float)
    bias = np.array(
        [max(np.linalg.norm(problem.grad(x) - central_difference(problem.objective, x, nu)) for x in points) for nu in nus]
    )
    c_hat = float(np.max(bias / nus**2))
    if np.all(bias <= exact_tol):
        return ConditionReport("D3", 2.0, 2.0, True, int(points.shape[0] * nus.size), details={"c_hat": 0.0, "bias": bias, "nus": nus, "exact": True})
    slope = float(np.polyfit(np.log(nus), np.log(bias), 1)[0])
    return ConditionReport(
        "D3",
        slope,
        2.0,
        bool(1.8 <= slope <= 2.2),
        int(points.shape[0] * nus.size),
        details={"c_hat": c_hat, "bias": bias, "nus": nus, "exact": False},
    )


# ---------------------------------------------------------------------------
# Constants of the tail bound
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class BoundConstants:
    kappa: float
    lam: float
    B: float
    F: float
    D: float
    E: float
    gamma: float
    a: float
    u: float
    alpha0: float
    G: float
    n: int
    Q: float
    H: float
    I: float
    J: float
    K: float
    R: float
    T0: int
    T1: float
    T2: float
    alpha_T2: float

    def recompute(self) -> "BoundConstants":
        return bound_constants(self.kappa, self.lam, self.B, self.F, self.D, self.E, self.gamma, self.a, self.u)

    def to_dict(self) -> dict:
        return asdict(self)


def _relative_decrement(a, u, gamma, t) -> float:
    if gamma == 0:
        return 0.0
    return 1.0 - ((u + t) / (u + t + 1.0)) ** gamma


def first_stable_time(a: float, u: float, gamma: float, kappa: float, B: float) -> int:
    """T0: first t with (alpha_s - alpha_{s+1}) / alpha_s < kappa / 2B for all s >= t.

    The relative decrement of a power law is decreasing in s, so the first
    crossing is the answer.
    """
    target = kappa / (2.0 * B)
    if gamma == 0 or target >= 1:
        return 0
    q = (1.0 - target) ** (1.0 / gamma)
    guess = max(0, int(math.floor(q / (1.0 - q) - u)))
    t = max(0, guess - 2)
    while _relative_decrement(a, u, gamma, t) >= target:
        t += 1
    while t > 0 and _relative_decrement(a, u, gamma, t - 1) < target:
        t -= 1
    return t


def bound_constants(kappa, lam, B, F, D, E, gamma, a, u) -> BoundConstants:
    """Fill in the constant table for alpha_t = a / (u + t)**gamma."""
    for name, v in (("kappa", kappa), ("lambda", lam), ("B", B), ("F", F), ("D", D), ("a", a)):
        if not v > 0:
            raise InvalidRegime(f"{name} must be positive, got {v}")
    if E < 0:
        raise InvalidRegime(f"E must be non-negative, got {E}")
    if not 0 <= gamma <= 1:
        raise InvalidRegime(f"gamma must lie in [0, 1], got {gamma}")
    if u < 0 or (u == 0 and gamma > 0):
        raise InvalidRegime("u must be positive unless gamma = 0")
    sched = PowerLaw(a, u, gamma)
    alpha0 = sched.rate(0)
    G = 1.0 / 4.0**gamma
    drift_scale = alpha0 * B + F
    if gamma < 1:
        n = 1
        u_pow = u**-gamma if u > 0 else 1.0
        T1 = u + 2.0 ** (1.0 + gamma) * drift_scale / (a * u_pow)
    else:
        n = 1 + math.ceil(drift_scale / (a * math.log(2.0)))
        T1 = u * 2.0**n
    Q = min(lam, kappa / (2.0 * E)) if E > 0 else lam
    J = Q * G**n
    half = kappa * J / 2.0
    if half == 0.0:
        raise InvalidRegime("J underflows to zero; n is too large for double precision")
    H = D * math.exp(half) / -math.expm1(-half)
    T0 = first_stable_time(a, u, gamma, kappa, B)
    T2 = max(float(T0), T1)
    alpha_T2 = a / (u + T2) ** gamma
    slack = F / alpha_T2 - B
    if not slack > 0:
        raise InvalidRegime(f"B = {B} must be below F / alpha_T2 = {F / alpha_T2:.6g}")
    I = (1.0 + H) * math.exp(Q * G / slack)
    K = I / J
    R = 1.0 + D * math.exp(Q * kappa / 2.0) * math.exp(Q * B) / -math.expm1(-Q * kappa / 2.0)
    return BoundConstants(
        kappa=kappa, lam=lam, B=B, F=F, D=D, E=E, gamma=gamma, a=a, u=u, alpha0=alpha0,
        G=G, n=n, Q=Q, H=H, I=I, J=J, K=K, R=R, T0=T0, T1=T1, T2=T2, alpha_T2=alpha_T2,
    )


def tail_bound(bc: BoundConstants, alpha_t: float, z):
    """min(1, I exp(-(J / alpha_t) z)), elementwise in z."""
    z = np.asarray(z, dtype=float)
    if np.any(z < 0):
        raise ValueError("z must be non-negative")
    out = np.minimum(1.0, bc.I * np.exp(-(bc.J / alpha_t) * z))
    return float(out) if out.ndim == 0 else out


def uniform_mle_tail(theta: float, n: int, z):
    """Exact P(n(theta - max U_i) >= z) for U_i ~ U(0, theta), and its limit e^{-z/theta}."""
    if not theta > 0 or n < 1:
        raise ValueError("theta must be positive and n at least 1")
    z = np.asarray(z, dtype=float)
    if np.any(z < 0) or np.any(z > n * theta):
        raise ValueError("z must lie in [0, n theta]")
    exact = (1.0 - z / (n * theta)) ** n
    limit = np.exp(-z / theta)
    if exact.ndim == 0:
        return float(exact), float(limit)
    return exact, limit


def uniform_mle_samples(theta: float, n: int, reps: int, rng, chunk: int = 10_000) -> np.ndarray:
    """reps draws of n(theta - max of n uniforms on [0, theta])."""
    gen = as_generator(rng)
    out = np.empty(reps)
    for start in range(0, reps, chunk):
        k = min(chunk, reps - start)
        out[start : start + k] = n * (theta - gen.uniform(0.0, theta, size=(k, n)).max(axis=1))
    return out


__all__ = [
    "AllOptimal",
    "BoundConstants",
    "ConditionReport",
    "InsufficientStates",
    "InvalidRegime",
    "MgfCurve",
    "NoGradient",
    "bound_constants",
    "central_difference",
    "check_drift",
    "check_gradient_noise",
    "check_increments",
    "check_kw_bias",
    "check_sharpness",
    "empirical_mgf",
    "first_stable_time",
    "increment_samples",
    "interior_margin",
    "local_probe",
    "one_step",
    "polytope_sharpness_K",
    "sample_feasible",
    "tail_bound",
    "uniform_mle_samples",
    "uniform_mle_tail",
]

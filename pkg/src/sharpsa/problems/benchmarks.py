"""Continuous benchmark instances (circle, spheres, ridge, LPs, 1-d reflected walk)."""

from __future__ import annotations

import math

import numpy as np

from ..core import Problem
from ..projections import Ball, Box, Intersection, NonnegOrthant, Polytope, Simplex

# Pentagon whose unique minimiser of (4, 6) . x is (2, 1).  Both edges at the
# optimum sit about 4.8 degrees off the level line of the cost, so unit-variance
# cost noise moves the iterate off the vertex with non-negligible probability.
LP2_VERTICES = np.array(
    [
        [2.0, 1.0],
        [31.0 / 6.0, -0.75],
        [43.0 / 6.0, 2.25],
        [7.0 / 6.0, 6.25],
        [-5.0 / 6.0, 3.25],
    ]
)
LP2_COST = np.array([4.0, 6.0])
LP2_OPTIMUM = np.array([2.0, 1.0])


def _gaussian_grad(mean_grad, sigma):
    """Batch-mean sampler for mean_grad(x) + sigma N(0, I)."""

    def sample_grad(x, rng, batch=1):
        g = mean_grad(x)
        return g + (sigma / math.sqrt(batch)) * rng.standard_normal(g.shape)

    return sample_grad


def make_circle(
    sigma: float = 1.0, value_sd: float = 0.1, center=(7.0, 7.0), radius: float = 15.0, x0=(4.0, 4.0)
) -> Problem:
    """Distance to (7, 7) over the disc of radius 15.

    ``value_sd`` is the standard deviation of the additive noise on function
    values seen by Kiefer-Wolfowitz (variance 0.01 by default).
    """
    x_star = np.asarray(center, dtype=float)

    def objective(x):
        return float(np.linalg.norm(x - x_star))

    def grad(x):
        r = x - x_star
        n = np.sqrt(r @ r)
        return r / n if n > 0 else np.zeros_like(r)

    def noisy_value(X, w):
        return np.linalg.norm(X - x_star, axis=1) + w

    def grad_rows(X):
        R = X - x_star
        n = np.sqrt((R * R).sum(axis=1, keepdims=True))
        return np.where(n > 0, R / np.where(n > 0, n, 1.0), 0.0)

    return Problem(
        name="circle",
        dimension=2,
        objective=objective,
        grad=grad,
        sample_grad=_gaussian_grad(grad, sigma),
        value_noise=lambda rng: value_sd * rng.standard_normal(),
        noisy_value=noisy_value,
        feasible=Ball(np.zeros(2), radius),
        optimum=x_star.copy(),
        opt_value=0.0,
        x0=np.asarray(x0, dtype=float),
        kappa=1.0,
        sigma=sigma,
        info={"grad_rows": grad_rows},
    )


def make_three_spheres(sigma: float = 1.0, axis: int = 3) -> Problem:
    """Minimise -x_axis over the intersection of three radius-2 balls.

    Balls are centred at (1, 0, 0), (-1, 0, 0) and (0, 1, 0).  With ``axis=1``
    the minimiser is (1, 0, 0), on the boundary of the ball centred at
    (-1, 0, 0).  With ``axis=3`` it is the apex (0, 0, sqrt(3)) where
    all three spheres meet.  Per-sample values are -x_axis + w . x, w ~ N(0, sigma^2 I).
    """
    if axis not in (1, 3):
        raise ValueError("axis must be 1 or 3")
    centers = [np.array([1.0, 0.0, 0.0]), np.array([-1.0, 0.0, 0.0]), np.array([0.0, 1.0, 0.0])]
    feasible = Intersection([Ball(c, 2.0) for c in centers])
    g = np.zeros(3)
    g[axis - 1] = -1.0
    optimum = np.array([1.0, 0.0, 0.0]) if axis == 1 else np.array([0.0, 0.0, math.sqrt(3.0)])

    return Problem(
        name="three-spheres",
        dimension=3,
        objective=lambda x: float(g @ x),
        grad=lambda x: g.copy(),
        sample_grad=_gaussian_grad(lambda x: g, sigma),
        value_noise=lambda rng: sigma * rng.standard_normal(3),
        noisy_value=lambda X, w: X @ g + X @ w,
        feasible=feasible,
        optimum=optimum,
        opt_value=float(g @ optimum),
        curvature=0.0,
        sigma=sigma,
        info={"axis": axis},
    )


def make_nn_ridge(x_plus=(1.0, -1.0), noise_sd: float = 1.0) -> Problem:
    """Streaming least squares over the quarter disc {x >= 0, |x| <= sqrt(0.9)}.

    Each sample draws a ~ N(0, I_2) and b = a . x_plus + xi; the mean objective
    is 0.5 (|x - x_plus|^2 + noise_sd^2).
    """
    x_plus = np.asarray(x_plus, dtype=float)
    feasible = Intersection([NonnegOrthant(2), Ball(np.zeros(2), math.sqrt(0.9))])
    optimum = np.array([math.sqrt(0.9), 0.0])

    def objective(x):
        r = x - x_plus
        return 0.5 * (float(r @ r) + noise_sd**2)

    def sample_grad(x, rng, batch=1):
        a = rng.standard_normal((batch, 2))
        xi = noise_sd * rng.standard_normal(batch)
        resid = a @ (x - x_plus) - xi
        return (a * resid[:, None]).mean(axis=0)

    def value_noise(rng):
        return rng.standard_normal(2), noise_sd * rng.standard_normal()

    def noisy_value(X, w):
        a, xi = w
        return 0.5 * (X @ a - a @ x_plus - xi) ** 2

    return Problem(
        name="nn-ridge",
        dimension=2,
        objective=objective,
        grad=lambda x: x - x_plus,
        sample_grad=sample_grad,
        value_noise=value_noise,
        noisy_value=noisy_value,
        feasible=feasible,
        optimum=optimum,
        opt_value=objective(optimum),
        curvature=0.0,
        sigma=noise_sd,
        info={"x_plus": x_plus},
    )


def make_lp2(sigma: float = 1.0, vertices=None, cost=None) -> Problem:
    """2-variable LP with Gaussian cost samples N(cost, sigma^2 I)."""
    vertices = LP2_VERTICES if vertices is None else np.asarray(vertices, dtype=float)
    c_bar = LP2_COST if cost is None else np.asarray(cost, dtype=float)
    feasible = Polytope(vertices)
    values = vertices @ c_bar
    best = int(np.argmin(values))
    others = np.delete(values, best)
    if not np.all(others > values[best] + 1e-9):
        raise ValueError("LP polytope must have a unique optimal vertex")
    optimum = vertices[best].copy()

    return Problem(
        name="lp2",
        dimension=2,
        objective=lambda x: float(c_bar @ x),
        grad=lambda x: c_bar.copy(),
        sample_grad=_gaussian_grad(lambda x: c_bar, sigma),
        value_noise=lambda rng: c_bar + sigma * rng.standard_normal(2),
        noisy_value=lambda X, w: X @ w,
        feasible=feasible,
        optimum=optimum,
        opt_value=float(values[best]),
        x0=vertices.mean(axis=0),
        curvature=0.0,
        sigma=sigma,
        info={"vertices": vertices, "c_bar": c_bar},
    )


def make_simplex_lp(n: int = 50, sigma: float = 1.0, costs=None) -> Problem:
    """min c . p over the probability simplex with c_i = i (strictly increasing)."""
    c_bar = np.arange(1.0, n + 1) if costs is None else np.asarray(costs, dtype=float)
    if np.any(np.diff(c_bar) <= 0):
        raise ValueError("costs must be strictly increasing")
    optimum = np.zeros(n)
    optimum[0] = 1.0

    def arm_cost(i, rng):
        return c_bar[i] + sigma * rng.standard_normal()

    return Problem(
        name=f"simplex{n}",
        dimension=n,
        objective=lambda p: float(c_bar @ p),
        grad=lambda p: c_bar.copy(),
        sample_grad=_gaussian_grad(lambda p: c_bar, sigma),
        value_noise=lambda rng: c_bar + sigma * rng.standard_normal(n),
        noisy_value=lambda X, w: X @ w,
        feasible=Simplex(n),
        optimum=optimum,
        opt_value=float(c_bar[0]),
        curvature=0.0,
        sigma=sigma,
        info={"arm_cost": arm_cost, "c_bar": c_bar},
    )


def make_reflected_1d(constrained: bool = True, sigma: float = 1.0, x_max: float = 100.0, x0: float = 1.0) -> Problem:
    """f(x) = (x + 1)^2 with N(0, sigma^2) gradient noise.

    Constrained: X = [0, x_max], optimum 0 where the gradient is 2.
    Unconstrained: X = [-x_max, x_max], optimum -1 where the gradient vanishes.
    """
    feasible = Box([0.0], [x_max]) if constrained else Box([-x_max], [x_max])
    optimum = np.array([0.0]) if constrained else np.array([-1.0])

    def objective(x):
        return float((x[0] + 1.0) ** 2)

    def grad(x):
        return 2.0 * (x + 1.0)

    def noisy_value(X, w):
        return (X[:, 0] + 1.0) ** 2 + w * X[:, 0]

    return Problem(
        name="reflected1d" if constrained else "unconstrained1d",
        dimension=1,
        objective=objective,
        grad=grad,
        sample_grad=_gaussian_grad(grad, sigma),
        value_noise=lambda rng: sigma * rng.standard_normal(),
        noisy_value=noisy_value,
        feasible=feasible,
        optimum=optimum,
        opt_value=objective(optimum),
        x0=np.array([float(x0)]),
        kappa=2.0 if constrained else None,
        curvature=0.0,
        sigma=sigma,
        info={"constrained": constrained, "grad_rows": grad},
    )


def make_constant(dimension: int = 1, sigma: float = 1.0) -> Problem:
    """Constant objective on the unit box: a control where no drift exists.

    The declared optimum is the box centre so that distance-based checks have
    states to examine.
    """
    centre = np.full(dimension, 0.5)
    zero = np.zeros(dimension)
    return Problem(
        name="constant",
        dimension=dimension,
        objective=lambda x: 0.0,
        grad=lambda x: zero.copy(),
        sample_grad=_gaussian_grad(lambda x: zero, sigma),
        value_noise=lambda rng: sigma * rng.standard_normal(),
        noisy_value=lambda X, w: np.full(X.shape[0], w),
        feasible=Box(np.zeros(dimension), np.ones(dimension)),
        optimum=centre,
        opt_value=0.0,
        sigma=sigma,
    )

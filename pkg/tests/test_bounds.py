import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import integrate
from scipy.stats import norm

from sharpsa.algorithms import KwConfig, PsgdConfig, SfwConfig
from sharpsa.bounds import (
    AllOptimal,
    InvalidRegime,
    NoGradient,
    bound_constants,
    central_difference,
    check_drift,
    check_gradient_noise,
    check_increments,
    check_kw_bias,
    check_sharpness,
    default_lyapunov,
    empirical_mgf,
    first_stable_time,
    interior_margin,
    polytope_sharpness_K,
    tail_bound,
    uniform_mle_samples,
    uniform_mle_tail,
)
from sharpsa.core import PowerLaw
from sharpsa.harness.fitting import empirical_ccdf
from sharpsa.problems import LP2_COST, LP2_VERTICES, make_problem
from sharpsa.projections import Ball, Box, Intersection, NonnegOrthant

H = PowerLaw(1.0, 1.0, 1.0)


# D1 -------------------------------------------------------------------------


def test_circle_kappa_is_one():
    rep = check_sharpness(make_problem("circle"), rng=0)
    assert rep.passed
    assert rep.estimate == pytest.approx(1.0, abs=1e-12)
    assert rep.details["half_kappa_sharpness_holds"]


@pytest.mark.parametrize("name", ["circle", "nn-ridge", "lp2", "simplex50", "mdp3", "reflected1d"])
def test_sharp_benchmarks_pass(name):
    rep = check_sharpness(make_problem(name), n_samples=500, rng=1)
    assert rep.passed, rep.details
    assert rep.details["half_kappa_sharpness_holds"]


@pytest.mark.parametrize("name, kw", [("unconstrained1d", {}), ("three-spheres", {}), ("three-spheres", {"axis": 1})])
def test_vanishing_gradient_detected(name, kw):
    rep = check_sharpness(make_problem(name, **kw), n_samples=500, rng=1)
    assert not rep.passed
    assert rep.details["vanishing"]


def test_sharpness_needs_gradient():
    p = make_problem("circle")
    p.grad = None
    with pytest.raises(NoGradient):
        check_sharpness(p)


def test_polytope_K_triangle():
    K = polytope_sharpness_K([[0, 0], [1, 0], [0, 1]], [1.0, 1.0])
    assert K == pytest.approx(1 / math.sqrt(2), rel=1e-12)


@pytest.mark.parametrize("vertices, cost", [(LP2_VERTICES, LP2_COST), (np.eye(5), np.arange(1.0, 6.0))])
def test_polytope_K_is_a_valid_sharpness_constant(vertices, cost):
    # c.x - c* >= K |c| dist(x, x*) at random convex combinations
    V = np.asarray(vertices, dtype=float)
    K = polytope_sharpness_K(V, cost)
    x_star = V[np.argmin(V @ cost)]
    W = np.random.default_rng(0).dirichlet(np.ones(len(V)) * 0.3, size=5000)
    X = W @ V
    gap = X @ cost - x_star @ cost
    dist = np.linalg.norm(X - x_star, axis=1)
    assert np.all(gap >= K * np.linalg.norm(cost) * dist - 1e-9)


def test_polytope_K_all_optimal():
    with pytest.raises(AllOptimal):
        polytope_sharpness_K([[0, 0], [1, 0]], [0.0, 1.0])


def test_interior_margin():
    s = Intersection([NonnegOrthant(2), Ball(np.zeros(2), 2.0)])
    assert interior_margin(s, [0.5, 0.5]) == pytest.approx(0.5)
    assert interior_margin(Box([0, 0], [1, 1]), [0.2, 0.9]) == pytest.approx(0.1)
    assert interior_margin(Ball([0, 0], 1.0), [2.0, 0.0]) == pytest.approx(-1.0)


# C1 -------------------------------------------------------------------------


def test_drift_circle_passes():
    rep = check_drift(make_problem("circle"), PsgdConfig(H, 10), kappa=0.5, B=1.0, n_states=20, n_inner=1000, rng=0, alpha=0.01)
    assert rep.passed
    assert rep.threshold == 1.0
    assert rep.estimate == pytest.approx(1.0, abs=0.1)


def test_drift_constant_control_fails():
    p = make_problem("constant", dimension=2)
    rep = check_drift(p, PsgdConfig(H, 10), kappa=0.5, B=1.0, n_states=20, n_inner=1000, rng=0, alpha=0.01)
    assert not rep.passed


def test_default_lyapunov():
    assert default_lyapunov(SfwConfig(H)) == "gap"
    assert default_lyapunov(PsgdConfig(H)) == "dist"
    assert default_lyapunov(KwConfig(H, nu=0.1)) == "dist"


# C2 / D2 ----------------------------------------------------------------------


def test_mgf_of_abs_normal_matches_quadrature():
    # E[e^{|Z|}] = 2 e^{1/2} Phi(1) for Z ~ N(0, 1)
    closed = 2 * math.exp(0.5) * norm.cdf(1.0)
    quad = 2 * integrate.quad(lambda z: math.exp(z) * norm.pdf(z), 0, 40)[0]
    assert quad == pytest.approx(closed, rel=1e-10)
    z = np.abs(np.random.default_rng(0).standard_normal(200_000))
    curve = empirical_mgf(z, [1.0])
    assert abs(curve.D[0] - closed) <= 3 * curve.se_D[0]


def test_mgf_E_term_gaussian():
    # E[(e^{lZ} - 1 - lZ) / l^2] = (e^{l^2/2} - 1) / l^2
    lam = 0.5
    z = np.random.default_rng(1).standard_normal(200_000)
    curve = empirical_mgf(z, [lam])
    assert abs(curve.E[0] - (math.exp(lam**2 / 2) - 1) / lam**2) <= 3 * curve.se_E[0]


def test_mgf_heavy_flag():
    z = np.r_[np.zeros(99), 50.0]
    curve = empirical_mgf(z, [0.01, 1.0])
    assert not curve.heavy[0] and curve.heavy[1]
    assert curve.stable_lambda() == 0.01


def test_mgf_rejects_bad_input():
    with pytest.raises(ValueError):
        empirical_mgf([1.0, np.inf], [1.0])
    with pytest.raises(ValueError):
        empirical_mgf([1.0], [0.0])


def test_increments_circle():
    rep = check_increments(make_problem("circle"), PsgdConfig(H, 10), kappa=0.5, alpha=0.01, n_states=10, n_inner=200, rng=0)
    assert rep.passed
    assert rep.details["D_at_lambda"] >= 1.0
    assert rep.details["E_at_lambda"] >= 0.0


def test_gradient_noise_circle():
    rep = check_gradient_noise(make_problem("circle"), n_states=10, n_draws=200, rng=0)
    assert rep.passed and rep.estimate > 0


# D3 -------------------------------------------------------------------------


def test_central_difference_exact_on_quadratic():
    f = lambda x: float(x @ x + 3 * x[0])
    x = np.array([0.3, -1.0])
    np.testing.assert_allclose(central_difference(f, x, 0.7), 2 * x + [3, 0], atol=1e-12)


@pytest.mark.parametrize("name", ["circle"])
def test_kw_bias_quadratic_in_nu(name):
    rep = check_kw_bias(make_problem(name), rng=0)
    assert rep.passed
    assert 1.8 <= rep.estimate <= 2.2


@pytest.mark.parametrize("name", ["three-spheres", "nn-ridge", "lp2", "reflected1d"])
def test_kw_bias_exact_for_low_degree(name):
    rep = check_kw_bias(make_problem(name), rng=0)
    assert rep.passed and rep.details["exact"]


# constants ------------------------------------------------------------------


def test_constants_example_gamma_one():
    # alpha_0 B + F = 3 with a = u = 1: n = 1 + ceil(3 / log 2) = 6
    bc = bound_constants(kappa=1.0, lam=0.5, B=1.0, F=2.0, D=1.2, E=0.8, gamma=1.0, a=1.0, u=1.0)
    assert bc.n == 6
    assert bc.T1 == 64
    assert bc.G == 0.25


def test_constants_gamma_below_one():
    bc = bound_constants(kappa=1.0, lam=0.5, B=1.0, F=2.0, D=1.2, E=0.8, gamma=0.5, a=1.0, u=4.0)
    alpha0 = 1.0 / 2.0
    assert bc.n == 1
    assert bc.T1 == pytest.approx(4.0 + 2**1.5 * (alpha0 * 1.0 + 2.0) / (1.0 * 4.0**-0.5))


@settings(max_examples=100, deadline=None)
@given(
    kappa=st.floats(0.1, 3.0),
    lam=st.floats(0.05, 2.0),
    B=st.floats(0.1, 5.0),
    D=st.floats(1.0, 5.0),
    E=st.floats(0.0, 5.0),
    gamma=st.floats(0.0, 1.0),
    a=st.floats(0.05, 2.0),
    u=st.floats(0.5, 20.0),
)
def test_constants_identities(kappa, lam, B, D, E, gamma, a, u):
    F = 10.0 * a * B + 1.0
    try:
        bc = bound_constants(kappa, lam, B, F, D, E, gamma, a, u)
    except InvalidRegime:
        return
    assert bc.recompute() == bc
    Q = min(lam, kappa / (2 * E)) if E > 0 else lam
    assert bc.G == pytest.approx(4.0**-gamma)
    assert bc.Q == pytest.approx(Q)
    assert bc.J == pytest.approx(Q * bc.G**bc.n)
    assert bc.K == pytest.approx(bc.I / bc.J)
    x = kappa * bc.J / 2
    # 1 - e^{-x} through expm1; the direct form cancels for small x
    assert bc.H == pytest.approx(D * math.exp(x) / -math.expm1(-x))
    assert bc.R == pytest.approx(1 + D * math.exp(Q * kappa / 2) * math.exp(Q * B) / -math.expm1(-Q * kappa / 2))
    assert bc.T2 == max(bc.T0, bc.T1)
    assert bc.I == pytest.approx((1 + bc.H) * math.exp(Q * bc.G / (F / bc.alpha_T2 - B)))


@settings(max_examples=100, deadline=None)
@given(st.floats(0.05, 1.0), st.floats(0.5, 30.0), st.floats(0.05, 2.0), st.floats(0.5, 50.0))
def test_first_stable_time_brute_force(gamma, u, kappa, B):
    s = PowerLaw(1.0, u, gamma)
    target = kappa / (2 * B)
    T0 = first_stable_time(1.0, u, gamma, kappa, B)
    rel = lambda t: (s.rate(t) - s.rate(t + 1)) / s.rate(t)
    assert rel(T0) < target
    if T0 > 0:
        assert rel(T0 - 1) >= target


@pytest.mark.parametrize(
    "kw",
    [dict(kappa=0.0), dict(E=-1.0), dict(gamma=1.5), dict(u=0.0), dict(gamma=0.0, u=0.0, B=5.0)],
)
def test_constants_invalid_regime(kw):
    args = dict(kappa=1.0, lam=0.5, B=1.0, F=2.0, D=1.2, E=0.8, gamma=1.0, a=1.0, u=1.0)
    args.update(kw)
    with pytest.raises(InvalidRegime):
        bound_constants(**args)


def test_tail_bound_shape():
    bc = bound_constants(kappa=1.0, lam=0.5, B=1.0, F=2.0, D=1.2, E=0.8, gamma=1.0, a=1.0, u=1.0)
    z = np.linspace(0, 50, 20)
    tb = tail_bound(bc, 0.01, z)
    assert np.all(tb <= 1.0) and np.all(np.diff(tb) <= 0)
    assert tail_bound(bc, 0.01, 1e6) < 1e-6
    with pytest.raises(ValueError):
        tail_bound(bc, 0.01, -1.0)


# uniform MLE ----------------------------------------------------------------


def test_uniform_mle_exact_and_limit():
    exact, limit = uniform_mle_tail(2.0, 500, 2.0)
    assert limit == pytest.approx(math.exp(-1))
    assert exact == pytest.approx((1 - 2.0 / 1000) ** 500)
    assert abs(exact - limit) < 2e-3


def test_uniform_mle_monte_carlo():
    s = uniform_mle_samples(2.0, 500, 100_000, 0)
    z = np.array([0.5, 1.0, 2.0])
    np.testing.assert_allclose(empirical_ccdf(s, z), np.exp(-z / 2.0), atol=0.01)


def test_uniform_mle_rejects():
    with pytest.raises(ValueError):
        uniform_mle_tail(0.0, 10, 1.0)
    with pytest.raises(ValueError):
        uniform_mle_tail(1.0, 10, 11.0)

import math

import numpy as np
import pytest
from scipy.optimize import linprog

from sharpsa.problems import (
    BENCHMARKS,
    LP2_COST,
    LP2_VERTICES,
    MdpModel,
    make_blackjack,
    make_circle,
    make_lp2,
    make_mdp_3state,
    make_mdp_dual,
    make_nn_ridge,
    make_problem,
    make_reflected_1d,
    make_simplex_lp,
    make_three_spheres,
)
from sharpsa.problems.blackjack import CARD_PROBS, dealer_outcomes, state_list, stick_reward


def lp_value(m: MdpModel) -> float:
    """Independent LP solve of the occupancy problem."""
    A = m.constraint_matrix()
    res = linprog(m.c_bar.reshape(-1), A_eq=A, b_eq=m.xi, bounds=(0, None), method="highs")
    assert res.status == 0
    return float(res.fun)


# ---------------------------------------------------------------- continuous


def test_circle_values():
    p = make_circle()
    assert p.objective(np.array([7.0, 7.0])) == 0.0
    assert p.objective(np.zeros(2)) == pytest.approx(math.sqrt(98))
    assert p.feasible.contains(p.initial_point())


def test_three_spheres_apex():
    p = make_three_spheres()
    for c in ([1, 0, 0], [-1, 0, 0], [0, 1, 0]):
        assert np.linalg.norm(p.optimum - np.array(c, dtype=float)) == pytest.approx(2.0, abs=1e-15)
    np.testing.assert_array_equal(p.grad(np.ones(3)), [0.0, 0.0, -1.0])
    alt = make_three_spheres(axis=1)
    np.testing.assert_array_equal(alt.grad(np.ones(3)), [-1.0, 0.0, 0.0])
    assert alt.feasible.contains(alt.optimum)


def test_three_spheres_optimum_beats_feasible_samples():
    p = make_three_spheres()
    gen = np.random.default_rng(0)
    pts = np.array([p.feasible.project(z) for z in gen.uniform(-3, 3, (300, 3))])
    assert np.all(pts @ p.grad(p.optimum) >= p.opt_value - 1e-6)


def test_nn_ridge_closed_form_matches_monte_carlo():
    p = make_nn_ridge()
    gen = np.random.default_rng(1)
    x = np.array([0.3, 0.4])
    vals = [p.noisy_value(x[None, :], p.value_noise(gen))[0] for _ in range(40_000)]
    se = np.std(vals) / math.sqrt(len(vals))
    assert abs(np.mean(vals) - p.objective(x)) < 4 * se
    assert p.objective(np.array([1.0, -1.0])) == pytest.approx(0.5)
    assert p.optimum @ p.optimum == pytest.approx(0.9)


def test_nn_ridge_optimum_is_constrained_minimiser():
    p = make_nn_ridge()
    th = np.linspace(0, math.pi / 2, 20_001)
    r = np.linspace(0, math.sqrt(0.9), 201)
    grid = (r[:, None, None] * np.stack([np.cos(th), np.sin(th)], -1)[None]).reshape(-1, 2)
    best = grid[np.argmin(((grid - [1.0, -1.0]) ** 2).sum(1))]
    np.testing.assert_allclose(best, p.optimum, atol=1e-4)


def test_lp2_vertex_oracle():
    p = make_lp2()
    assert LP2_COST @ p.optimum == 14.0
    vals = LP2_VERTICES @ LP2_COST
    assert np.sum(vals <= 14.0) == 1
    res = linprog(LP2_COST, A_ub=p.feasible.H, b_ub=p.feasible.h, bounds=(None, None), method="highs")
    np.testing.assert_allclose(res.x, p.optimum, atol=1e-9)


def test_lp2_rejects_tied_vertices():
    with pytest.raises(ValueError):
        make_lp2(vertices=[[0, 0], [1, 0], [0, 1]], cost=[0.0, 1.0])


def test_simplex_lp():
    p = make_simplex_lp()
    assert p.objective(np.full(50, 1 / 50)) == pytest.approx(25.5)
    assert p.opt_value == 1.0
    with pytest.raises(ValueError):
        make_simplex_lp(costs=[1.0, 1.0])


def test_reflected_1d():
    p = make_reflected_1d()
    assert p.grad(np.array([0.0]))[0] == 2.0
    assert p.opt_value == 1.0
    u = make_reflected_1d(constrained=False)
    assert u.grad(u.optimum)[0] == 0.0


@pytest.mark.parametrize("name", ["circle", "three-spheres", "lp2", "simplex50", "reflected1d"])
def test_noisy_values_unbiased(name):
    p = make_problem(name)
    gen = np.random.default_rng(4)
    x = p.initial_point()
    vals = np.array([p.sample_value(x, gen) for _ in range(20_000)])
    se = vals.std() / math.sqrt(vals.size)
    assert abs(vals.mean() - p.objective(x)) < 4 * se + 1e-12


def test_registry_names():
    assert {"circle", "three-spheres", "nn-ridge", "lp2", "simplex50", "mab50", "mdp3", "blackjack", "reflected1d"} <= set(
        BENCHMARKS
    )
    with pytest.raises(KeyError):
        make_problem("nope")


# ---------------------------------------------------------------- MDPs


def test_three_state_transitions():
    m = make_mdp_3state()
    np.testing.assert_allclose(m.P.sum(-1), 1.0, atol=1e-12)
    # from s1, anticlockwise lands on s3 and clockwise on s2
    np.testing.assert_allclose(m.P[0, 0], [1 / 9, 1 / 9, 7 / 9], atol=1e-15)
    np.testing.assert_allclose(m.P[0, 1], [1 / 9, 7 / 9, 1 / 9], atol=1e-15)
    np.testing.assert_array_equal(m.c_bar[:, 0], [1.0, 2.0, 3.0])
    assert m.pi.sum() == pytest.approx(1.0) and np.all(m.pi == 1 / 6)


def test_three_state_optimum_matches_lp_solver():
    m = make_mdp_3state()
    p = make_mdp_dual(m)
    assert p.opt_value == pytest.approx(lp_value(m), abs=1e-9)
    assert p.feasible.contains(p.optimum, 1e-10)


def test_three_state_feasibility_residual():
    p = make_problem("mdp3")
    gen = np.random.default_rng(2)
    X = p.info["sampler"](gen, 50)
    A = p.info["A_eq"]
    xi = make_mdp_3state().xi
    assert np.abs(X @ A.T - xi).max() < 1e-8 and X.min() >= 0
    for z in gen.normal(0, 1, (50, 6)):
        assert p.feasible.violation(p.feasible.project(z)) < 1e-8


def test_uniform_policy_start():
    p = make_problem("mdp3")
    x0 = p.initial_point()
    assert p.feasible.violation(x0) < 1e-8
    # mass of a discounted occupancy is sum(xi) / (1 - beta)
    assert x0.sum() == pytest.approx(1.0 / 0.8)


def test_decoupled_case():
    # with beta near 0 the optimum picks the cheaper action in every state
    P = np.full((2, 2, 2), 0.5)
    m = MdpModel(P=P, c_bar=[[3.0, 1.0], [0.5, 2.0]], beta=1e-12, xi=[0.4, 0.6], pi=np.full((2, 2), 0.25))
    p = make_mdp_dual(m)
    np.testing.assert_allclose(p.optimum, [0.0, 0.4, 0.6, 0.0], atol=1e-9)
    assert p.opt_value == pytest.approx(0.4 * 1.0 + 0.6 * 0.5, abs=1e-9)


def test_mdp_cost_estimator_unbiased():
    p = make_problem("mdp3")
    gen = np.random.default_rng(6)
    x = p.initial_point()
    G = np.array([p.sample_grad(x, gen, 1) for _ in range(100_000)])
    se = G.std(axis=0, ddof=1) / math.sqrt(G.shape[0])
    assert np.all(np.abs(G.mean(axis=0) - p.grad(x)) <= 3 * se)


def test_model_validation():
    P = np.full((1, 1, 1), 1.0)
    with pytest.raises(ValueError):
        MdpModel(P=P * 0.9, c_bar=[[1.0]], beta=0.5, xi=[1.0], pi=[[1.0]])
    with pytest.raises(ValueError):
        MdpModel(P=P, c_bar=[[1.0]], beta=0.0, xi=[1.0], pi=[[1.0]])
    with pytest.raises(ValueError):
        MdpModel(P=P, c_bar=[[1.0]], beta=0.5, xi=[1.0], pi=[[0.5]])


# ---------------------------------------------------------------- Blackjack


def test_blackjack_shape_and_rows():
    m = make_blackjack()
    assert m.n_states == 290 and m.n_actions == 2 and len(state_list()) == 290
    np.testing.assert_allclose(m.P.sum(-1), 1.0, atol=1e-12)
    assert m.pi.ravel()[0] == pytest.approx(1 / 580)


def _dealer_sim(card, gen):
    total, soft = card, card == 1
    while True:
        value = total + 10 if soft and total + 10 <= 21 else total
        if value >= 17:
            return value
        r = gen.choice(10, p=CARD_PROBS) + 1
        total += r
        soft = soft or r == 1
        if total > 21:
            return "bust"


@pytest.mark.parametrize("card", [1, 6, 10])
def test_dealer_distribution_against_simulation(card):
    gen = np.random.default_rng(card)
    n = 40_000
    sims = [_dealer_sim(card, gen) for _ in range(n)]
    exact = dealer_outcomes(card)
    assert sum(exact.values()) == pytest.approx(1.0, abs=1e-12)
    for k, q in exact.items():
        freq = sum(s == k for s in sims) / n
        assert abs(freq - q) < 4 * math.sqrt(q * (1 - q) / n) + 1e-9


def test_stick_reward_extremes():
    assert stick_reward(22, 5) == -1.0
    # 21 never loses; it only pushes against a dealer 21
    for d in range(1, 11):
        assert stick_reward(21, d) == pytest.approx(1.0 - dealer_outcomes(d).get(21, 0.0))


def test_blackjack_optimum_matches_lp_solver():
    m = make_blackjack()
    p = make_mdp_dual(m)
    assert p.opt_value == pytest.approx(lp_value(m), abs=1e-8)
    assert p.feasible.violation(p.initial_point()) < 1e-8

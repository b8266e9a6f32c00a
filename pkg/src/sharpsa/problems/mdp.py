"""Discounted MDPs solved through their occupancy-measure (dual) LP."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ..core import Problem
from ..projections import AffineNonneg, NonConvergence


class InfeasibleDual(RuntimeError):
    pass


@dataclass
class MdpModel:
    """Tabular MDP.

    ``P[s, a, :]`` is a distribution over ``n_states + n_terminal`` successor
    states; terminal states are absorbing, cost-free and excluded from the LP.
    """

    P: np.ndarray
    c_bar: np.ndarray
    beta: float
    xi: np.ndarray
    pi: np.ndarray
    cost_sd: float = 1.0
    n_terminal: int = 0
    labels: list = field(default_factory=list)

    def __post_init__(self):
        self.P = np.asarray(self.P, dtype=float)
        self.c_bar = np.asarray(self.c_bar, dtype=float)
        self.xi = np.asarray(self.xi, dtype=float)
        self.pi = np.asarray(self.pi, dtype=float)
        S, A, S_next = self.P.shape
        if S_next != S + self.n_terminal:
            raise ValueError("P must have n_states + n_terminal successor columns")
        if self.c_bar.shape != (S, A) or self.pi.shape != (S, A) or self.xi.shape != (S,):
            raise ValueError("c_bar, pi must be (S, A) and xi must be (S,)")
        if not 0 < self.beta <= 1:
            raise ValueError("beta must lie in (0, 1]")
        if np.any(self.P < 0) or np.max(np.abs(self.P.sum(-1) - 1)) > 1e-12:
            raise ValueError("transition rows must be probability distributions")
        if np.any(self.xi <= 0) or np.any(self.pi <= 0):
            raise ValueError("xi and pi must be strictly positive")
        if abs(self.pi.sum() - 1) > 1e-12:
            raise ValueError("pi must sum to one")

    @property
    def n_states(self) -> int:
        return self.P.shape[0]

    @property
    def n_actions(self) -> int:
        return self.P.shape[1]

    @property
    def P_inner(self) -> np.ndarray:
        """Transitions restricted to non-terminal successors."""
        return self.P[:, :, : self.n_states]

    def constraint_matrix(self) -> np.ndarray:
        """A with A x = xi encoding flow balance; x is indexed s * |A| + a."""
        S, A = self.n_states, self.n_actions
        E = np.repeat(np.eye(S), A, axis=1)  # E[s', (s, a)] = 1[s == s']
        Pflat = self.P_inner.reshape(S * A, S).T  # [s', (s, a)]
        return E - self.beta * Pflat

    def value_iteration(self, tol: float = 1e-13, max_iter: int = 1_000_000):
        """Optimal cost-to-go V and Q by fixed-point iteration."""
        V = np.zeros(self.n_states)
        Pin = self.P_inner
        for _ in range(max_iter):
            Q = self.c_bar + self.beta * Pin @ V
            V_new = Q.min(axis=1)
            if np.max(np.abs(V_new - V)) < tol:
                V = V_new
                break
            V = V_new
        else:
            raise RuntimeError("value iteration did not converge")
        Q = self.c_bar + self.beta * Pin @ V
        return V, Q

    def occupancy(self, policy: np.ndarray) -> np.ndarray:
        """Occupancy x(s, a) of a stochastic policy ``policy[s, a]``."""
        S = self.n_states
        P_pol = np.einsum("sa,sat->st", policy, self.P_inner)
        mu = np.linalg.solve(np.eye(S) - self.beta * P_pol.T, self.xi)
        return mu[:, None] * policy


def make_mdp_dual(m: MdpModel, cost_sd=None, tie_tol: float = 1e-9) -> Problem:
    """PSGD-ready problem over the occupancy polytope of ``m``."""
    S, A = m.n_states, m.n_actions
    n = S * A
    A_eq = m.constraint_matrix()
    feasible = AffineNonneg(A_eq, m.xi)
    c_flat = m.c_bar.reshape(n)
    pi_flat = m.pi.reshape(n)
    sd = m.cost_sd if cost_sd is None else cost_sd

    V, Q = m.value_iteration()
    opt_actions = Q <= Q.min(axis=1, keepdims=True) + tie_tol
    greedy = np.zeros((S, A))
    greedy[np.arange(S), np.argmin(Q, axis=1)] = 1.0
    x_star = m.occupancy(greedy).reshape(n)
    opt_value = float(c_flat @ x_star)
    lp_value = float(m.xi @ V)
    if abs(opt_value - lp_value) > 1e-8 * max(1.0, abs(lp_value)):
        raise RuntimeError("occupancy value disagrees with the dynamic programming value")

    uniform = np.full((S, A), 1.0 / A)
    x0 = m.occupancy(uniform).reshape(n)
    if np.any(x0 < 0) or np.linalg.norm(A_eq @ x0 - m.xi) > 1e-8:
        raise InfeasibleDual("uniform-policy occupancy violates the dual constraints")
    try:
        feasible.project(x0 + 1e-3)
    except NonConvergence as exc:
        raise InfeasibleDual(str(exc)) from exc

    # Optimal face: feasible occupancies supported on optimal actions only.
    support = opt_actions.reshape(n)
    if support.sum() == S:
        distance_oracle = None
    else:
        face = AffineNonneg(A_eq[:, support], m.xi)

        def distance_oracle(x):
            x = np.asarray(x, dtype=float)
            off = x[~support]
            on = x[support]
            d_on = on - face.project(on)
            return float(np.sqrt(off @ off + d_on @ d_on))

    def sample_grad(x, rng, batch=1):
        idx = rng.choice(n, size=batch, p=pi_flat)
        c_hat = c_flat[idx] + sd * rng.standard_normal(batch)
        g = np.zeros(n)
        np.add.at(g, idx, c_hat / pi_flat[idx])
        return g / batch

    def sampler(rng, k):
        """Occupancies of k random stochastic policies (all feasible)."""
        pols = rng.dirichlet(np.ones(A), size=(k, S))
        return np.array([m.occupancy(pol).reshape(n) for pol in pols])

    def value_noise(rng):
        k = int(rng.choice(n, p=pi_flat))
        return k, c_flat[k] + sd * rng.standard_normal()

    def noisy_value(X, w):
        k, c_hat = w
        return X[:, k] * c_hat / pi_flat[k]

    return Problem(
        name="mdp-dual",
        dimension=n,
        objective=lambda x: float(c_flat @ x),
        grad=lambda x: c_flat.copy(),
        sample_grad=sample_grad,
        value_noise=value_noise,
        noisy_value=noisy_value,
        feasible=feasible,
        optimum=x_star,
        distance_oracle=distance_oracle,
        opt_value=opt_value,
        x0=x0,
        curvature=0.0,
        sigma=sd,
        info={"model": m, "sampler": sampler, "V": V, "Q": Q, "A_eq": A_eq, "optimal_actions": opt_actions},
    )


def make_mdp_3state(beta: float = 0.2, p_desired: float = 2.0 / 3.0) -> MdpModel:
    """Three states on a ring, two actions (anticlockwise, clockwise).

    With probability ``p_desired`` the move succeeds; otherwise the next state
    is uniform over all three states, so the target gets 2/3 + 1/9 = 7/9.
    Costs c(s_i, a) ~ N(i, 1).
    """
    S, A = 3, 2
    P = np.zeros((S, A, S))
    for s in range(S):
        for a, step in enumerate((-1, +1)):
            P[s, a, :] = (1.0 - p_desired) / S
            P[s, a, (s + step) % S] += p_desired
    c_bar = np.repeat(np.arange(1.0, S + 1)[:, None], A, axis=1)
    return MdpModel(
        P=P,
        c_bar=c_bar,
        beta=beta,
        xi=np.full(S, 1.0 / 3.0),
        pi=np.full((S, A), 1.0 / 6.0),
        cost_sd=1.0,
        labels=[f"s{i + 1}" for i in range(S)],
    )

"""Benchmark problem constructors and the name registry used by the CLI."""

from .benchmarks import (
    LP2_COST,
    LP2_OPTIMUM,
    LP2_VERTICES,
    make_circle,
    make_constant,
    make_lp2,
    make_nn_ridge,
    make_reflected_1d,
    make_simplex_lp,
    make_three_spheres,
)
from .blackjack import make_blackjack
from .mdp import InfeasibleDual, MdpModel, make_mdp_3state, make_mdp_dual


def _mdp3(**kw):
    beta = kw.pop("beta", 0.2)
    return make_mdp_dual(make_mdp_3state(beta=beta), **kw)


def _blackjack(**kw):
    return make_mdp_dual(make_blackjack(), **kw)


def _unconstrained1d(**kw):
    return make_reflected_1d(constrained=False, **kw)


BENCHMARKS = {
    "circle": make_circle,
    "three-spheres": make_three_spheres,
    "nn-ridge": make_nn_ridge,
    "lp2": make_lp2,
    "simplex50": lambda **kw: make_simplex_lp(n=50, **kw),
    "mab50": lambda **kw: make_simplex_lp(n=50, **kw),
    "mdp3": _mdp3,
    "blackjack": _blackjack,
    "reflected1d": make_reflected_1d,
    "unconstrained1d": _unconstrained1d,
    "constant": make_constant,
}


def make_problem(name: str, **overrides):
    try:
        factory = BENCHMARKS[name]
    except KeyError:
        raise KeyError(f"unknown benchmark {name!r}; known: {', '.join(sorted(BENCHMARKS))}") from None
    return factory(**overrides)


__all__ = [
    "BENCHMARKS",
    "InfeasibleDual",
    "LP2_COST",
    "LP2_OPTIMUM",
    "LP2_VERTICES",
    "MdpModel",
    "make_blackjack",
    "make_circle",
    "make_constant",
    "make_lp2",
    "make_mdp_3state",
    "make_mdp_dual",
    "make_nn_ridge",
    "make_problem",
    "make_reflected_1d",
    "make_simplex_lp",
    "make_three_spheres",
]

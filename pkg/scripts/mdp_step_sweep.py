"""Slope of the 3-state MDP gap for several step constants a in a / (1 + t).

The reduced costs of this model are small (costs depend only on the state
and the discount is 0.2), so a small a leaves the run in its transient.
"""

import argparse

import numpy as np

from sharpsa.algorithms import PsgdConfig, run
from sharpsa.core import PowerLaw, RngStream
from sharpsa.harness import fit_loglog
from sharpsa.problems import make_problem


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--a", type=float, nargs="+", default=[0.1, 1.0, 5.0, 20.0])
    ap.add_argument("--reps", type=int, default=10)
    ap.add_argument("--iters", type=int, default=10_000)
    ap.add_argument("--batch", type=int, default=200)
    args = ap.parse_args()
    p = make_problem("mdp3")
    for a in args.a:
        cfg = PsgdConfig(PowerLaw(a, 1.0, 1.0), args.batch)
        gap = np.mean([run(p, cfg, args.iters, RngStream(1, r), thin=False).gap for r in range(args.reps)], axis=0)
        fit = fit_loglog(np.arange(gap.size), gap, t_min=100)
        print(f"a = {a:6.2f}  gap(0) {gap[0]:.3e}  gap(T) {gap[-1]:.3e}  slope {fit.slope:+.3f}  r2 {fit.r2:.3f}", flush=True)


if __name__ == "__main__":
    main()

"""n (theta - max U_i) against its exponential limit."""

import argparse

import numpy as np

from sharpsa.bounds import uniform_mle_samples, uniform_mle_tail
from sharpsa.harness import empirical_ccdf


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--theta", type=float, default=2.0)
    ap.add_argument("--n", type=int, default=500)
    ap.add_argument("--reps", type=int, default=100_000)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()
    s = uniform_mle_samples(args.theta, args.n, args.reps, args.seed)
    print(f"{'z':>5} {'monte carlo':>12} {'exact':>10} {'limit':>10}")
    for z in (0.25, 0.5, 1.0, 2.0, 4.0):
        exact, limit = uniform_mle_tail(args.theta, args.n, z)
        print(f"{z:5.2f} {float(empirical_ccdf(s, z)):12.5f} {exact:10.5f} {limit:10.5f}")


if __name__ == "__main__":
    main()

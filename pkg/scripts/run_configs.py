"""Run experiment configs and print one slope line per config.

    python scripts/run_configs.py                       # every configs/*.toml with a power-law schedule
    python scripts/run_configs.py configs/circle_*.toml --out runs
"""

import argparse
import glob
from pathlib import Path

from sharpsa.core import Staged
from sharpsa.harness import load_config, run_experiment, run_linear_convergence

ROOT = Path(__file__).resolve().parent.parent


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("configs", nargs="*")
    ap.add_argument("--out", default="runs")
    ap.add_argument("--reps", type=int)
    ap.add_argument("--iters", type=int)
    args = ap.parse_args()
    paths = args.configs or sorted(glob.glob(str(ROOT / "configs" / "*.toml")))
    for path in paths:
        cfg = load_config(path).with_overrides(replications=args.reps, iters=args.iters)
        out = Path(args.out) / cfg.label
        if isinstance(cfg.build_schedule(), Staged):
            rep = run_linear_convergence(cfg)
            ratios = " ".join(f"{r:.2f}" for r in rep.ratios[:10])
            print(f"{cfg.label:24s} stage ratios {ratios}  log2 slope {rep.log2_slope:.3f}")
            continue
        report = run_experiment(cfg, out)
        fit = report.fit
        shown = f"slope {fit.slope:+.3f}  r2 {fit.r2:.3f}" if fit else f"no fit: {report.fit_error}"
        print(f"{cfg.label:24s} {shown}  {report.wall_time:6.1f}s  -> {out}", flush=True)


if __name__ == "__main__":
    main()

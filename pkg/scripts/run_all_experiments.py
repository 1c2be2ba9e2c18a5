#!/usr/bin/env python3
"""Run every experiment once with shared defaults and print a summary table.

Artifacts land in runs/<experiment>/. All runs share one master seed, so the
whole sweep is reproducible byte for byte.
"""

import argparse
import sys

from fhnlab.config import EXPERIMENTS, RunConfig
from fhnlab.cli import run


def main() -> int:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--n-sites", dest="half_width", type=int, default=16)
    ap.add_argument("--dt", type=float, default=2.0**-7)
    ap.add_argument("--out", default="runs")
    args = ap.parse_args()

    failures = []
    for name in EXPERIMENTS:
        cfg = RunConfig(
            experiment=name,
            seed=args.seed,
            half_width=args.half_width,
            dt=args.dt,
            out_dir=f"{args.out}/{name}",
        )
        report = run(cfg)
        ok = report.get("pass", False)
        if not ok:
            failures.append(name)
        print(f"{name:12s} {'PASS' if ok else 'FAIL'}")
    return 1 if failures else 0


if __name__ == "__main__":
    sys.exit(main())

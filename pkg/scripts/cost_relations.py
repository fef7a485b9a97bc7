"""Practical/estimated cost ratios for the square -> circle -> triangle ->
faraway circle chain.

    python3 scripts/cost_relations.py --trials 50 --out relations.csv
"""
import argparse
import csv
import sys

import numpy as np

from formation_lab.harness.experiments import run_cost_relations
from formation_lab.harness.scenario import demo_scenario

STAGES = ("leader_square", "to_circle", "to_triangle", "faraway_circle")


def main(argv=None):
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--trials", type=int, default=50)
    p.add_argument("--out", default="relations.csv")
    a = p.parse_args(argv)
    recs = run_cost_relations(demo_scenario(a.seed), trials=a.trials)
    with open(a.out, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(("trial",) + STAGES)
        for r in recs:
            w.writerow([r.trial] + [repr(getattr(r, k).cost_ratio) for k in STAGES])
    for k in STAGES:
        v = np.array([getattr(r, k).cost_ratio for r in recs])
        print(f"{k:<15} ratio min {v.min():.3f}  mean {v.mean():.3f}  max {v.max():.3f}")
    return 0


if __name__ == "__main__":
    sys.exit(main())

"""Hungarian vs fixed vs random arrangements in the two standard cases.

    python3 scripts/cost_comparison.py --trials 200 --outdir results
"""
import argparse
import sys
from dataclasses import replace
from pathlib import Path

from formation_lab.harness import io as hio
from formation_lab.harness.experiments import comparison_summary, run_cost_comparison
from formation_lab.harness.scenario import circle_center_scenario, demo_scenario

CASES = {"square_leader": demo_scenario, "circle_center": circle_center_scenario}


def main(argv=None):
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--trials", type=int, default=200)
    p.add_argument("--cost", choices=("practical", "estimated"), default="practical")
    p.add_argument("--outdir", default="results")
    a = p.parse_args(argv)
    out = Path(a.outdir)
    out.mkdir(parents=True, exist_ok=True)
    for name, make in CASES.items():
        s = replace(make(a.seed), trials=a.trials)
        rows, _ = run_cost_comparison(s, cost=a.cost)
        hio.write_comparison_csv(rows, out / f"comparison_{name}.csv")
        wins = sum(r.hungarian <= min(r.fixed, r.random) for r in rows)
        print(f"{name}: hungarian best in {wins}/{len(rows)}")
        for k, v in comparison_summary(rows).items():
            print(f"  {k:<9} mean {v['mean']:10.1f}  std {v['std']:10.1f}  median {v['median']:10.1f}")
    return 0


if __name__ == "__main__":
    sys.exit(main())

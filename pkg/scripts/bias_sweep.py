"""Formation bias against the lower bound along the n, sigma and partition axes.

    python3 scripts/bias_sweep.py --trials 20 --outdir results
"""
import argparse
import sys
from pathlib import Path

from formation_lab.harness import io as hio
from formation_lab.harness.experiments import BIAS_AXES, run_bias_sweep
from formation_lab.harness.scenario import bias_base_scenario


def main(argv=None):
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--trials", type=int, default=20)
    p.add_argument("--axes", default=",".join(BIAS_AXES))
    p.add_argument("--outdir", default="results")
    a = p.parse_args(argv)
    out = Path(a.outdir)
    out.mkdir(parents=True, exist_ok=True)
    base = bias_base_scenario(a.seed, a.trials)
    for axis in a.axes.split(","):
        rows, _ = run_bias_sweep(base, axis)
        hio.write_sweep_csv(rows, out / f"sweep_{axis}.csv")
        print(f"axis {axis}")
        for r in rows:
            flag = "" if r.mean_bias >= r.bound else "  below bound"
            print(f"  {r.param:7g}  bias {r.mean_bias:8.4f} +- {r.std_bias:7.4f}  bound {r.bound:8.4f}{flag}")
    return 0


if __name__ == "__main__":
    sys.exit(main())

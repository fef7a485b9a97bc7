"""Command line entry point.

Exit codes: 0 success, 2 a run did not converge, 64 usage or input errors.
"""
from __future__ import annotations

import argparse
import math
import sys
from dataclasses import replace

import numpy as np

from ..assignment import leader_cost
from ..bounds import (
    BoundParams,
    bayes_lower_bound,
    bayes_lower_bound_terms,
    differential_entropy,
    fisher_information,
    mi_upper,
    mi_upper_gaussian,
    sdpi_alpha,
    sdpi_eta_upper,
)
from ..core import InvalidInputError, InvalidSpecError
from ..formations import FormationSpec, Shape, center_cost
from . import io as hio
from .experiments import (
    BIAS_AXES,
    comparison_summary,
    run_bias_sweep,
    run_conversion,
    run_cost_comparison,
    run_demo,
    PERM_KEY,
    scenario_center,
    start_positions,
    strategy_assignment,
    trial_stream,
)
from .scenario import apply_seed_override, bias_base_scenario, demo_scenario, load_scenario

EXIT_OK, EXIT_NOT_CONVERGED, EXIT_USAGE = 0, 2, 64


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _scenario(args, default):
    if args.scenario:
        s = load_scenario(args.scenario)
    else:
        s = apply_seed_override(default)
    if getattr(args, "seed", None) is not None:
        s = s.with_seed(args.seed)
    if getattr(args, "trials", None) is not None:
        s = replace(s, trials=args.trials)
    return s


def _print_record(r, out):
    for k, v in r.__dict__.items():
        print(f"{k:>18}  {v}", file=out)


def cmd_assign(args, out):
    s = _scenario(args, demo_scenario())
    x = start_positions(s, 0)
    f = s.formation.build()
    c = scenario_center(s, x)
    g = trial_stream(s.seed, 0).child(PERM_KEY).generator()
    a = strategy_assignment(args.strategy, x, f, s.leader_mode, c, g)
    cost = leader_cost(x, f, a) if s.leader_mode else center_cost(x, f, a.mapping, c)
    print("robot,slot,x,y", file=out)
    for i, d in enumerate(a.mapping):
        print(f"{i},{d},{float(x[i, 0])!r},{float(x[i, 1])!r}", file=out)
    if a.leader is not None:
        print(f"# leader {a.leader} at slot {a.leader_slot}", file=out)
    else:
        print(f"# center {float(c[0])!r},{float(c[1])!r}", file=out)
    print(f"# estimated cost {cost!r}", file=out)
    return EXIT_OK


def _emit_run(tr, rec, args, out):
    if args.out:
        hio.write_trajectory_csv(tr, args.out)
    if args.svg:
        hio.trajectory_svg(tr, args.svg)
    _print_record(rec, out)
    if not tr.converged:
        print("did not converge", file=sys.stderr)
        return EXIT_NOT_CONVERGED
    return EXIT_OK


def cmd_simulate(args, out):
    s = _scenario(args, demo_scenario())
    tr, rec = run_demo(s)
    return _emit_run(tr, rec, args, out)


def _parse_center(text):
    if text is None or text == "auto":
        return None
    parts = text.replace(",", " ").split()
    if len(parts) != 2:
        raise UsageError(f"center must be 'auto' or 'x,y', got {text!r}")
    try:
        return np.array([float(p) for p in parts])
    except ValueError as e:
        raise UsageError(str(e)) from e


def cmd_convert(args, out):
    s = _scenario(args, demo_scenario())
    tr0, rec0 = run_demo(s)
    if not tr0.converged:
        print("initial formation did not converge", file=sys.stderr)
        return EXIT_NOT_CONVERGED
    target = FormationSpec(Shape(args.to), s.robot_count, s.formation.area)
    tr, rec = run_conversion(s, tr0.final.positions, target, _parse_center(args.center), 0, 1, args.d0)
    return _emit_run(tr, rec, args, out)


def cmd_bound(args, out):
    p = BoundParams(args.n, args.sigma, args.l0, args.bits)
    base = math.e if args.base == "e" else 2
    unit = "nats" if base == math.e else "bits"
    g, s = bayes_lower_bound_terms(p, base)
    rows = [
        ("differential_entropy", differential_entropy(p.l0, base), unit),
        ("fisher_information", fisher_information(p.n, p.sigma), ""),
        ("mi_upper_gaussian", mi_upper_gaussian(p, base), unit),
        ("sdpi_alpha", sdpi_alpha(p), ""),
        ("sdpi_eta_upper", sdpi_eta_upper(p), ""),
        ("mi_upper", mi_upper(p, base), unit),
        ("bound_gaussian_branch", g, ""),
        ("bound_sdpi_branch", s, ""),
        ("bayes_lower_bound", bayes_lower_bound(p, base), ""),
    ]
    for name, v, u in rows:
        print(f"{name:<22} {v:.6g} {u}".rstrip(), file=out)
    return EXIT_OK


def cmd_experiment_cost(args, out):
    s = _scenario(args, demo_scenario())
    if args.trials is None and not args.scenario:
        s = replace(s, trials=200)
    rows, records = run_cost_comparison(s, cost=args.cost)
    text = hio.write_comparison_csv(rows, args.out)
    if not args.out:
        out.write(text)
    for k, v in comparison_summary(rows).items():
        print(f"# {k:<9} mean {v['mean']:.1f} std {v['std']:.1f} median {v['median']:.1f}", file=out)
    if any(not r.converged for recs in records.values() for r in recs):
        print("some runs did not converge", file=sys.stderr)
        return EXIT_NOT_CONVERGED
    return EXIT_OK


def cmd_experiment_bias(args, out):
    s = _scenario(args, bias_base_scenario())
    if args.trials is None and not args.scenario:
        s = replace(s, trials=20)
    values = None
    if args.values:
        try:
            values = [float(v) for v in args.values.split(",")]
        except ValueError as e:
            raise UsageError(str(e)) from e
    rows, records = run_bias_sweep(s, args.axis, values)
    text = hio.write_sweep_csv(rows, args.out)
    if not args.out:
        out.write(text)
    if any(not r.converged for recs in records for r in recs):
        print("some runs did not converge", file=sys.stderr)
        return EXIT_NOT_CONVERGED
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="formation-lab", description="Multi-robot formation assignment, simulation and bounds.")
    sub = p.add_subparsers(dest="command", required=True)

    def scen(sp, trials=False):
        sp.add_argument("--scenario", help="scenario file (INI style)")
        sp.add_argument("--seed", type=int, help="override the scenario seed")
        if trials:
            sp.add_argument("--trials", type=int)

    sp = sub.add_parser("assign", help="print the arrangement for random start positions")
    scen(sp)
    sp.add_argument("--strategy", choices=("hungarian", "fixed", "random"), default="hungarian")
    sp.set_defaults(func=cmd_assign)

    for name, fn, hlp in (("simulate", cmd_simulate, "run to the scenario formation"),
                          ("convert", cmd_convert, "form, then convert to another shape")):
        sp = sub.add_parser(name, help=hlp)
        scen(sp)
        sp.add_argument("--out", help="trajectory CSV")
        sp.add_argument("--svg", help="SVG overlay")
        if name == "convert":
            sp.add_argument("--to", choices=[x.value for x in Shape], required=True)
            sp.add_argument("--center", default="auto", help="'auto' or 'x,y'")
            sp.add_argument("--d0", type=float, help="approach threshold (default R/2)")
        sp.set_defaults(func=fn)

    sp = sub.add_parser("bound", help="evaluate the formation-bias lower bound")
    sp.add_argument("--n", type=int, required=True, help="samples per distance estimate")
    sp.add_argument("--sigma", type=float, required=True, help="distance noise standard deviation")
    sp.add_argument("--l0", type=float, required=True, help="ranging threshold")
    sp.add_argument("--bits", type=float, required=True, help="quantization rate b")
    sp.add_argument("--base", choices=("2", "e"), default="2")
    sp.set_defaults(func=cmd_bound)

    sp = sub.add_parser("experiment", help="cost comparison or bias sweep")
    esub = sp.add_subparsers(dest="experiment", required=True)
    ep = esub.add_parser("cost", help="Hungarian vs fixed vs random arrangements")
    scen(ep, trials=True)
    ep.add_argument("--cost", choices=("practical", "estimated"), default="practical")
    ep.add_argument("--out", help="comparison CSV")
    ep.set_defaults(func=cmd_experiment_cost)
    ep = esub.add_parser("bias", help="formation bias against the lower bound")
    scen(ep, trials=True)
    ep.add_argument("--axis", choices=sorted(BIAS_AXES), required=True)
    ep.add_argument("--values", help="comma separated parameter values")
    ep.add_argument("--out", help="sweep CSV")
    ep.set_defaults(func=cmd_experiment_bias)
    return p


def main(argv=None, out=None) -> int:
    out = sys.stdout if out is None else out
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return int(e.code) if e.code is not None else EXIT_OK
    try:
        return args.func(args, out)
    except (UsageError, InvalidSpecError, InvalidInputError, OSError) as e:
        print(f"formation-lab: error: {e}", file=sys.stderr)
        return EXIT_USAGE


def main_entry() -> None:
    sys.exit(main())


if __name__ == "__main__":
    main_entry()

"""Experiment drivers: single demo run, arrangement cost comparison, bias
sweeps and the practical-vs-estimated cost study.

Every trial t draws from ``RngStream(seed).child(t)``: key 0 for the start
positions, key 1 for sensing, key 2 for the random arrangement.  Results are
therefore independent of trial order and of which other trials ran.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, replace
from typing import Optional, Sequence

import numpy as np

from ..assignment import assign_with_center, assign_with_leader, leader_cost
from ..bounds import BoundParams, bayes_lower_bound
from ..core import Assignment, Formation, InvalidInputError, RngStream
from ..formations import FormationSpec, Shape, center_cost, leading_slot, optimal_center
from ..motion import Trajectory, convert_formation, run_to_formation
from ..sensing import quant_bits
from .scenario import Scenario

POS_KEY, SENSE_KEY, PERM_KEY = 0, 1, 2

BIAS_AXES = {
    "n": (1, 5, 10, 20, 40, 60),
    "sigma": (0.1, 0.5, 0.9, 1.3),
    "b": (50, 100, 150, 200),
}


@dataclass(frozen=True)
class ExperimentRecord:
    trial: int
    seed: int
    estimated_cost: float
    practical_cost: float
    formation_bias: float
    slots_to_converge: int
    collision_count: int
    converged: bool = True

    @classmethod
    def from_trajectory(cls, trial: int, seed: int, tr: Trajectory) -> "ExperimentRecord":
        return cls(trial, seed, float(tr.estimated_cost), tr.practical_cost, tr.formation_bias,
                   tr.slots, len(tr.collisions), tr.converged)

    @property
    def cost_ratio(self) -> float:
        return self.practical_cost / self.estimated_cost


def sample_positions(g: np.random.Generator, n: int, box, min_separation: float = 0.0,
                     origin=(0.0, 0.0), max_tries: int = 100000) -> np.ndarray:
    """Uniform points in ``origin + [0, w] x [0, h]``, each at least
    ``min_separation`` from the earlier ones (sequential rejection)."""
    w, h = box
    pts = np.empty((n, 2))
    k = tries = 0
    while k < n:
        p = np.asarray(origin) + g.random(2) * (w, h)
        tries += 1
        if k == 0 or np.min(np.linalg.norm(pts[:k] - p, axis=1)) >= min_separation:
            pts[k] = p
            k += 1
        elif tries > max_tries:
            raise InvalidInputError("could not place robots with the requested separation")
    return pts


def trial_stream(seed: int, trial: int) -> RngStream:
    return RngStream(seed).child(trial)


def start_positions(s: Scenario, trial: int) -> np.ndarray:
    g = trial_stream(s.seed, trial).child(POS_KEY).generator()
    return sample_positions(g, s.robot_count, s.init_box, s.min_separation)


def scenario_center(s: Scenario, x: np.ndarray):
    if s.leader_mode:
        return None
    return optimal_center(x) if s.mode == "auto" else np.asarray(s.mode, dtype=float)


def run_demo(s: Scenario, trial: int = 0, record_decisions: bool = False, positions=None):
    """Assign and drive the robots into the scenario formation.

    ``positions`` replaces the random start.  Returns ``(trajectory,
    record)``; files are written by the caller (see ``harness.io``).
    """
    x = start_positions(s, trial) if positions is None else np.asarray(positions, dtype=float)
    f = s.formation.build()
    rng = trial_stream(s.seed, trial).child(SENSE_KEY)
    tr = run_to_formation(x, f, s.sim, s.sensor, s.quantizer, rng, center=scenario_center(s, x),
                          record_decisions=record_decisions)
    return tr, ExperimentRecord.from_trajectory(trial, s.seed, tr)


def run_conversion(s: Scenario, positions, target: FormationSpec, center=None,
                   trial: int = 0, key: int = 0, d0: Optional[float] = None):
    """Convert from ``positions`` into ``target`` around ``center`` (None =
    cost-optimal center)."""
    rng = trial_stream(s.seed, trial).child(SENSE_KEY, key)
    tr = convert_formation(positions, target.build(), s.sim, s.sensor, s.quantizer, rng,
                           center=center, d0=d0)
    return tr, ExperimentRecord.from_trajectory(trial, s.seed, tr)


# ---------------------------------------------------------------------------
# arrangement comparison


@dataclass(frozen=True)
class ComparisonRow:
    trial: int
    hungarian: float
    fixed: float
    random: float


STRATEGIES = ("hungarian", "fixed", "random")


def strategy_assignment(strategy: str, x: np.ndarray, f: Formation, leader_mode: bool,
                        center, g: Optional[np.random.Generator] = None) -> Assignment:
    """Arrangement for one of the three strategies.

    fixed: robot i takes slot i.  random: a uniform permutation from ``g``.
    In leader mode the robot holding the leading slot becomes the leader.
    """
    n = len(x)
    if strategy == "hungarian":
        res = assign_with_leader(x, f) if leader_mode else assign_with_center(x, f, center)
        return res.assignment
    if strategy == "fixed":
        mapping = tuple(range(n))
    elif strategy == "random":
        if g is None:
            raise InvalidInputError("random strategy needs a generator")
        mapping = tuple(int(v) for v in g.permutation(n))
    else:
        raise InvalidInputError(f"unknown strategy {strategy!r}")
    if not leader_mode:
        return Assignment(mapping)
    ls = leading_slot(f)
    return Assignment(mapping, mapping.index(ls), ls)


def run_cost_comparison(s: Scenario, trials: Optional[int] = None, cost: str = "practical",
                        strategies: Sequence[str] = STRATEGIES):
    """Per-trial cost of each arrangement strategy on shared start positions.

    ``cost="practical"`` simulates each arrangement and reports the sum of
    squared path lengths; ``cost="estimated"`` reports the straight-line
    objective.  Returns ``(rows, records)`` where ``records[strategy]`` holds
    the per-trial ExperimentRecords (empty for estimated cost).
    """
    if cost not in ("practical", "estimated"):
        raise InvalidInputError(f"cost must be practical or estimated, got {cost!r}")
    trials = s.trials if trials is None else trials
    f = s.formation.build()
    rows, records = [], {k: [] for k in strategies}
    for t in range(trials):
        x = start_positions(s, t)
        c = scenario_center(s, x)
        g = trial_stream(s.seed, t).child(PERM_KEY).generator()
        out = {}
        for k in STRATEGIES:
            if k not in strategies:
                out[k] = math.nan
                continue
            a = strategy_assignment(k, x, f, s.leader_mode, c, g)
            if cost == "estimated":
                out[k] = leader_cost(x, f, a) if s.leader_mode else center_cost(x, f, a.mapping, c)
                continue
            rng = trial_stream(s.seed, t).child(SENSE_KEY)
            tr = run_to_formation(x, f, s.sim, s.sensor, s.quantizer, rng, center=c, assignment=a)
            records[k].append(ExperimentRecord.from_trajectory(t, s.seed, tr))
            out[k] = tr.practical_cost
        rows.append(ComparisonRow(t, out["hungarian"], out["fixed"], out["random"]))
    return rows, records


def comparison_summary(rows) -> dict:
    """Mean, standard deviation and quartiles per strategy."""
    out = {}
    for k in STRATEGIES:
        v = np.array([getattr(r, k) for r in rows], dtype=float)
        out[k] = {
            "mean": float(v.mean()),
            "std": float(v.std(ddof=1)) if len(v) > 1 else 0.0,
            "q25": float(np.quantile(v, 0.25)),
            "median": float(np.median(v)),
            "q75": float(np.quantile(v, 0.75)),
        }
    return out


# ---------------------------------------------------------------------------
# bias sweeps


@dataclass(frozen=True)
class SweepRow:
    param: float
    mean_bias: float
    std_bias: float
    bound: float


def sweep_point(base: Scenario, axis: str, value) -> Scenario:
    """Scenario for one point of a sweep along ``axis``."""
    if axis == "n":
        return replace(base, sensor=replace(base.sensor, n_samples=int(value)))
    if axis == "sigma":
        return replace(base, sensor=replace(base.sensor, sigma=float(value)))
    if axis == "b":
        return base.with_sim(n_r=int(value))
    raise InvalidInputError(f"unknown sweep axis {axis!r}")


def axis_base(base: Scenario, axis: str) -> Scenario:
    """The fixed parameters that go with each sweep: distance noise 2 for the
    n-sweep, 10 samples for the sigma-sweep, and 10 samples with noise 0.01
    for the partition sweep."""
    if axis == "n":
        return base
    if axis == "sigma":
        return replace(base, sensor=replace(base.sensor, n_samples=10))
    if axis == "b":
        return replace(base, sensor=replace(base.sensor, n_samples=10, sigma=0.01))
    raise InvalidInputError(f"unknown sweep axis {axis!r}")


def point_bound(s: Scenario) -> float:
    p = BoundParams(s.sensor.n_samples, s.sensor.sigma, s.quantizer.l0, quant_bits(s.sim.n_r))
    return bayes_lower_bound(p)


def run_bias_sweep(base: Scenario, axis: str, values: Optional[Sequence] = None,
                   trials: Optional[int] = None):
    """Mean formation bias per parameter value with the matching lower bound.

    Trial t uses the same start positions and sensing stream at every point
    (common random numbers), so the curve shape is not masked by
    trial-to-trial scatter.  Returns ``(rows, records)``.
    """
    values = BIAS_AXES[axis] if values is None else values
    trials = base.trials if trials is None else trials
    base = axis_base(base, axis)
    rows, records = [], []
    for v in values:
        s = sweep_point(base, axis, v)
        recs = [run_demo(s, t)[1] for t in range(trials)]
        b = np.array([r.formation_bias for r in recs])
        rows.append(SweepRow(float(v), float(b.mean()),
                             float(b.std(ddof=1)) if trials > 1 else 0.0, point_bound(s)))
        records.append(recs)
    return rows, records


# ---------------------------------------------------------------------------
# practical versus estimated cost


@dataclass(frozen=True)
class CostRelationRecord:
    trial: int
    leader_square: ExperimentRecord
    to_circle: ExperimentRecord
    to_triangle: ExperimentRecord
    faraway_circle: ExperimentRecord


def run_cost_relations(s: Scenario, trials: Optional[int] = None, faraway_center=(-100.0, 0.0)):
    """Per trial: random start -> square with a leader -> circle around the
    optimal center -> triangle around the optimal center -> circle around a
    distant fixed center (two-phase)."""
    trials = s.trials if trials is None else trials
    n, area = s.robot_count, s.formation.area
    sq = replace(s, formation=FormationSpec(Shape.SQUARE, n, area), mode="leader")
    out = []
    for t in range(trials):
        tr, r0 = run_demo(sq, t)
        tr1, r1 = run_conversion(s, tr.final.positions, FormationSpec(Shape.CIRCLE, n, area), None, t, 1)
        tr2, r2 = run_conversion(s, tr1.final.positions, FormationSpec(Shape.TRIANGLE, n, area), None, t, 2)
        _, r3 = run_conversion(s, tr2.final.positions, FormationSpec(Shape.CIRCLE, n, area),
                               np.asarray(faraway_center, dtype=float), t, 3)
        out.append(CostRelationRecord(t, r0, r1, r2, r3))
    return out

"""Scenario files: flat ``key = value`` lines grouped under ``[section]`` headers.

Recognised sections and keys (all optional, defaults in brackets)::

    [scenario]   robot_count [15]  init_box [300, 300]  trials [1]
                 seed [0]  min_separation [4.0]
    [formation]  shape [square]  area [28800]  bottom_count []
    [mode]       mode [leader]  center [auto]
    [sim]        U_max [10]  R [300]  n_r [128]  n_theta [73]
                 safety_radius [1]  arrival_tolerance []  max_slots [3000]
    [sensor]     sigma [1]  n_samples [10]  sigma_theta [0]
    [quantizer]  l0 [120]

The quantizer shares R, n_r and n_theta with ``[sim]``.  ``center`` is
either ``auto`` or ``x, y``.  The environment variable FORMATION_LAB_SEED,
when set, replaces the scenario seed.
"""
from __future__ import annotations

import configparser
import os
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Optional, Tuple

import numpy as np

from ..core import InvalidSpecError, SimConfig
from ..formations import FormationSpec, Shape
from ..sensing import QuantizerSpec, SensorModel

SEED_ENV = "FORMATION_LAB_SEED"

_KEYS = {
    "scenario": {"robot_count", "init_box", "trials", "seed", "min_separation"},
    "formation": {"shape", "area", "bottom_count"},
    "mode": {"mode", "center"},
    "sim": {"u_max", "r", "n_r", "n_theta", "safety_radius", "arrival_tolerance", "max_slots"},
    "sensor": {"sigma", "n_samples", "sigma_theta"},
    "quantizer": {"l0"},
}


@dataclass(frozen=True)
class Scenario:
    robot_count: int = 15
    init_box: Tuple[float, float] = (300.0, 300.0)
    formation: FormationSpec = field(default_factory=lambda: FormationSpec(Shape.SQUARE, 15, 28800.0))
    # "leader", "auto" (centroid) or a fixed center
    mode: object = "leader"
    sim: SimConfig = field(default_factory=SimConfig)
    sensor: SensorModel = field(default_factory=lambda: SensorModel(1.0, 10, 0.0))
    quantizer: QuantizerSpec = field(default_factory=QuantizerSpec)
    trials: int = 1
    min_separation: float = 4.0

    def __post_init__(self):
        if self.robot_count != self.formation.n:
            raise InvalidSpecError(f"robot_count {self.robot_count} != formation size {self.formation.n}")
        if self.trials < 1:
            raise InvalidSpecError("trials must be >= 1")
        if len(self.init_box) != 2 or min(self.init_box) <= 0:
            raise InvalidSpecError("init_box must be two positive numbers")
        q, s = self.quantizer, self.sim
        if (q.R, q.n_r, q.n_theta) != (s.R, s.n_r, s.n_theta):
            raise InvalidSpecError("quantizer and sim disagree on R, n_r or n_theta")
        if self.min_separation < 0:
            raise InvalidSpecError("min_separation must be non-negative")
        if isinstance(self.mode, str):
            if self.mode not in ("leader", "auto"):
                raise InvalidSpecError(f"unknown mode {self.mode!r}")
        else:
            c = np.asarray(self.mode, dtype=float)
            if c.shape != (2,) or not np.all(np.isfinite(c)):
                raise InvalidSpecError("center must be two finite numbers")
            object.__setattr__(self, "mode", (float(c[0]), float(c[1])))

    @property
    def seed(self) -> int:
        return self.sim.seed

    @property
    def leader_mode(self) -> bool:
        return self.mode == "leader"

    def with_seed(self, seed: int) -> "Scenario":
        return replace(self, sim=replace(self.sim, seed=int(seed)))

    def with_sim(self, **kw) -> "Scenario":
        """Replace SimConfig fields and keep the quantizer in step."""
        sim = replace(self.sim, **kw)
        q = replace(self.quantizer, R=sim.R, n_r=sim.n_r, n_theta=sim.n_theta)
        return replace(self, sim=sim, quantizer=q)


def _floats(text: str, k: int) -> tuple:
    parts = [p for p in text.replace(",", " ").split()]
    if len(parts) != k:
        raise InvalidSpecError(f"expected {k} numbers, got {text!r}")
    return tuple(float(p) for p in parts)


def parse_scenario(text: str) -> Scenario:
    cp = configparser.ConfigParser(interpolation=None, inline_comment_prefixes=("#", ";"))
    cp.optionxform = str.lower
    try:
        cp.read_string(text)
    except configparser.Error as e:
        raise InvalidSpecError(f"malformed scenario: {e}") from e
    for sec in cp.sections():
        if sec not in _KEYS:
            raise InvalidSpecError(f"unknown section [{sec}]")
        extra = set(cp[sec]) - _KEYS[sec]
        if extra:
            raise InvalidSpecError(f"unknown keys in [{sec}]: {sorted(extra)}")

    def get(sec, key, conv, default):
        if not cp.has_option(sec, key) or cp.get(sec, key).strip() == "":
            return default
        raw = cp.get(sec, key).strip()
        try:
            return conv(raw)
        except ValueError as e:
            raise InvalidSpecError(f"[{sec}] {key} = {raw!r}: {e}") from e

    n = get("scenario", "robot_count", int, 15)
    box = get("scenario", "init_box", lambda s: _floats(s, 2), (300.0, 300.0))
    trials = get("scenario", "trials", int, 1)
    seed = get("scenario", "seed", int, 0)
    min_sep = get("scenario", "min_separation", float, 4.0)

    shape = get("formation", "shape", str.lower, "square")
    area = get("formation", "area", float, 28800.0)
    bottom = get("formation", "bottom_count", int, None)
    try:
        fspec = FormationSpec(Shape(shape), n, area, bottom)
    except ValueError as e:
        raise InvalidSpecError(str(e)) from e

    mode = get("mode", "mode", str.lower, "leader")
    center = get("mode", "center", str.lower, "auto")
    if mode == "center":
        mode = "auto" if center == "auto" else _floats(center, 2)
    elif mode != "leader":
        raise InvalidSpecError(f"mode must be leader or center, got {mode!r}")

    sim = SimConfig(
        U_max=get("sim", "u_max", float, 10.0),
        R=get("sim", "r", float, 300.0),
        n_r=get("sim", "n_r", int, 128),
        n_theta=get("sim", "n_theta", int, 73),
        safety_radius=get("sim", "safety_radius", float, 1.0),
        arrival_tolerance=get("sim", "arrival_tolerance", float, None),
        max_slots=get("sim", "max_slots", int, 3000),
        seed=seed,
    )
    sensor = SensorModel(
        sigma=get("sensor", "sigma", float, 1.0),
        n_samples=get("sensor", "n_samples", int, 10),
        sigma_theta=get("sensor", "sigma_theta", float, 0.0),
    )
    q = QuantizerSpec(sim.R, sim.n_r, sim.n_theta, get("quantizer", "l0", float, 120.0))
    return Scenario(n, box, fspec, mode, sim, sensor, q, trials, min_sep)


def apply_seed_override(s: Scenario, environ=None) -> Scenario:
    env = os.environ if environ is None else environ
    raw = env.get(SEED_ENV)
    if raw is None or raw.strip() == "":
        return s
    try:
        return s.with_seed(int(raw))
    except ValueError as e:
        raise InvalidSpecError(f"{SEED_ENV}={raw!r} is not an unsigned integer") from e


def load_scenario(path, environ=None) -> Scenario:
    return apply_seed_override(parse_scenario(Path(path).read_text()), environ)


def dump_scenario(s: Scenario) -> str:
    """Inverse of ``parse_scenario`` (up to formatting)."""
    f = s.formation
    if s.leader_mode:
        mode, center = "leader", "auto"
    elif s.mode == "auto":
        mode, center = "center", "auto"
    else:
        mode, center = "center", f"{s.mode[0]!r}, {s.mode[1]!r}"
    lines = [
        "[scenario]",
        f"robot_count = {s.robot_count}",
        f"init_box = {s.init_box[0]!r}, {s.init_box[1]!r}",
        f"trials = {s.trials}",
        f"seed = {s.seed}",
        f"min_separation = {s.min_separation!r}",
        "",
        "[formation]",
        f"shape = {f.shape.value}",
        f"area = {f.area!r}",
        f"bottom_count = {'' if f.triangle_bottom_count is None else f.triangle_bottom_count}",
        "",
        "[mode]",
        f"mode = {mode}",
        f"center = {center}",
        "",
        "[sim]",
        f"U_max = {s.sim.U_max!r}",
        f"R = {s.sim.R!r}",
        f"n_r = {s.sim.n_r}",
        f"n_theta = {s.sim.n_theta}",
        f"safety_radius = {s.sim.safety_radius!r}",
        f"arrival_tolerance = {s.sim.arrival_tolerance!r}",
        f"max_slots = {s.sim.max_slots}",
        "",
        "[sensor]",
        f"sigma = {s.sensor.sigma!r}",
        f"n_samples = {s.sensor.n_samples}",
        f"sigma_theta = {s.sensor.sigma_theta!r}",
        "",
        "[quantizer]",
        f"l0 = {s.quantizer.l0!r}",
        "",
    ]
    return "\n".join(lines)


def demo_scenario(seed: int = 0) -> Scenario:
    """Square with a leader, 15 robots in a 300 x 300 start box."""
    return Scenario().with_seed(seed)


def circle_center_scenario(seed: int = 0) -> Scenario:
    return replace(Scenario(), formation=FormationSpec(Shape.CIRCLE, 15, 28800.0), mode="auto").with_seed(seed)


def bias_base_scenario(seed: int = 0, trials: int = 20) -> Scenario:
    """Circle formation around the centroid with R=200, 200 radial
    partitions, angle noise 0.05 and distance noise 2 (10 samples)."""
    sim = SimConfig(U_max=10.0, R=200.0, n_r=200, n_theta=73, seed=seed)
    return Scenario(
        robot_count=15,
        formation=FormationSpec(Shape.CIRCLE, 15, 28800.0),
        mode="auto",
        sim=sim,
        sensor=SensorModel(2.0, 10, 0.05),
        quantizer=QuantizerSpec(200.0, 200, 73, 120.0),
        trials=trials,
    )

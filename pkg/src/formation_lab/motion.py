"""Leader-follower region stepping with collision avoidance.

Each robot senses the relative position of its current destination, locates
itself in the polar partition centered there, and steps one ring inward per
slot.  Robots plan in ascending id order; a robot only yields to robots that
planned before it (and to robots already standing still), so lower ids keep
their paths.
"""
from __future__ import annotations

import enum
import math
from collections import deque
from dataclasses import dataclass, field, replace
from typing import Optional

import numpy as np

from .assignment import assign_with_center, assign_with_leader
from .core import (
    CENTER,
    Assignment,
    Formation,
    FollowerGraph,
    InvalidInputError,
    InvalidStateError,
    RngStream,
    SimConfig,
    as_point,
    as_points,
    cap_velocity,
)
from .formations import optimal_center
from .sensing import QuantizerSpec, SensorModel, formation_bias, quantize_ring, quantize_sector


class Phase(enum.Enum):
    APPROACH_CENTER = "approach"
    FORMING = "forming"
    DONE = "done"


class Action(enum.Enum):
    INWARD = "inward"
    SIDE_CCW = "ccw"
    SIDE_CW = "cw"
    STOP = "stop"
    EVADE = "evade"
    ARRIVED = "arrived"


# preference order when the ring-1 stop rule does not apply
MOVES = (Action.INWARD, Action.SIDE_CCW, Action.SIDE_CW)


@dataclass(frozen=True)
class PolarRegion:
    """Ring h and sector j (both 1-based).  ``outside`` marks a robot farther
    than R from its destination, where h and j are only nominal."""

    h: int
    j: int
    outside: bool = False


@dataclass(frozen=True)
class StepDecision:
    action: Action
    target: Optional[PolarRegion] = None
    blockers: tuple = ()


@dataclass(frozen=True)
class SwarmState:
    slot: int
    positions: np.ndarray
    velocities: np.ndarray
    arrived: np.ndarray
    graph: FollowerGraph
    phase: Phase = Phase.FORMING
    center: Optional[np.ndarray] = None

    def __post_init__(self):
        for name in ("positions", "velocities", "arrived"):
            a = np.array(getattr(self, name))
            a.setflags(write=False)
            object.__setattr__(self, name, a)

    @property
    def n(self) -> int:
        return len(self.positions)


@dataclass(frozen=True)
class CollisionEvent:
    slot: int
    i: int
    j: int
    distance: float


@dataclass
class Trajectory:
    states: list
    path_lengths: np.ndarray
    collisions: list = field(default_factory=list)
    decisions: list = field(default_factory=list)
    converged: bool = False
    estimated_cost: float = float("nan")
    assignment: Optional[Assignment] = None
    formation: Optional[Formation] = None
    min_distance: float = float("inf")

    @property
    def final(self) -> SwarmState:
        return self.states[-1]

    @property
    def slots(self) -> int:
        return self.final.slot - self.states[0].slot

    @property
    def practical_cost(self) -> float:
        """Sum over robots of the squared travelled path length, the simulated
        counterpart of the squared straight-line estimate."""
        return float(np.sum(self.path_lengths**2))

    @property
    def formation_bias(self) -> float:
        s = self.final
        return formation_bias(s.positions, ideal_destinations(s))


# ---------------------------------------------------------------------------
# follower graph and destinations


def _knn_adjacency(slots: np.ndarray, k: int) -> list:
    n = len(slots)
    d = np.linalg.norm(slots[:, None, :] - slots[None, :, :], axis=-1)
    adj = [set() for _ in range(n)]
    for i in range(n):
        order = sorted((j for j in range(n) if j != i), key=lambda j: (d[i, j], j))
        for j in order[:k]:
            adj[i].add(j)
            adj[j].add(i)
    return [sorted(a, key=lambda j, i=i: (d[i, j], j)) for i, a in enumerate(adj)]


def build_follower_graph(f: Formation, a: Assignment, k: int = 3) -> FollowerGraph:
    """Reference robots and offsets for an arrangement.

    Without a leader every robot tracks the center with offset f_{d_i}.  With
    a leader, a BFS tree is grown from the leader's slot over the k-nearest
    neighbour graph of slots (k grows until the graph is connected) and each
    robot tracks the robot standing at its parent slot.
    """
    slots = f.slots
    n = len(slots)
    if len(a) != n:
        raise InvalidInputError("assignment and formation sizes differ")
    d = np.asarray(a.mapping)
    if a.leader is None:
        return FollowerGraph((CENTER,) * n, slots[d])
    robot_at = a.inverse()
    kk = min(k, n - 1)
    while True:
        adj = _knn_adjacency(slots, kk)
        parent = [-1] * n
        parent[a.leader_slot] = a.leader_slot
        queue = deque([a.leader_slot])
        while queue:
            u = queue.popleft()
            for v in adj[u]:
                if parent[v] < 0:
                    parent[v] = u
                    queue.append(v)
        if min(parent) >= 0 or kk >= n - 1:
            break
        kk += 1
    follows = [robot_at[parent[d[i]]] for i in range(n)]
    offsets = slots[d] - slots[d[follows]]
    return FollowerGraph(tuple(follows), offsets)


def current_destination(i: int, s: SwarmState, c=None) -> np.ndarray:
    """Reference position plus the required offset for robot i."""
    h = s.graph.follows[i]
    if h == CENTER:
        c = s.center if c is None else as_point(c)
        if c is None:
            raise InvalidStateError("center mode needs a center")
        return c + s.graph.offsets[i]
    return s.positions[h] + s.graph.offsets[i]


def _destinations(positions, graph: FollowerGraph, center) -> np.ndarray:
    follows = np.asarray(graph.follows)
    ref = np.empty_like(positions)
    is_c = follows == CENTER
    if is_c.any():
        if center is None:
            raise InvalidStateError("center mode needs a center")
        ref[is_c] = center
    ref[~is_c] = positions[follows[~is_c]]
    return ref + graph.offsets


def ideal_destinations(s: SwarmState) -> np.ndarray:
    """Exact slot positions: c + f_{d_i} in center mode, or the formation
    anchored at the leader's current position in leader mode."""
    g = s.graph
    lead = g.leader
    if lead is None:
        return _destinations(s.positions, g, s.center)
    out = np.empty_like(s.positions)
    for i in range(s.n):
        acc = np.zeros(2)
        j = i
        while g.follows[j] != j:
            acc += g.offsets[j]
            j = g.follows[j]
        out[i] = s.positions[lead] + acc
    return out


# ---------------------------------------------------------------------------
# planning


def plan_step(region: PolarRegion, blocked=frozenset(), sectors: Optional[int] = None) -> StepDecision:
    """Inward if free, else counterclockwise, else clockwise, else stop.

    ``blocked`` holds the candidate actions whose target conflicts with a
    claim that binds this robot.  ``sectors`` (n_theta - 1) wraps the sector
    index of side moves; without it the raw j +/- 1 is reported.
    """
    if region.h == 1 and not region.outside:
        return StepDecision(Action.ARRIVED, region)
    for act in MOVES:
        if act not in blocked:
            return StepDecision(act, target_region(region, act, sectors))
    return StepDecision(Action.STOP, region)


def target_region(region: PolarRegion, act: Action, sectors: Optional[int] = None) -> PolarRegion:
    if act is Action.INWARD:
        return region if region.outside else replace(region, h=region.h - 1)
    if act in (Action.SIDE_CCW, Action.SIDE_CW):
        j = region.j + (1 if act is Action.SIDE_CCW else -1)
        if sectors:
            j = (j - 1) % sectors + 1
        return replace(region, j=j)
    return region


def detect_conflicts(claims, safety_radius: float, positions=None) -> set:
    """Pairs (i, j), i < j, whose claimed points lie within 2*safety_radius of
    each other, or where one claim is that close to the other's position."""
    c = as_points(claims)
    thr = 2.0 * safety_radius
    d = np.linalg.norm(c[:, None, :] - c[None, :, :], axis=-1) <= thr
    if positions is not None:
        p = as_points(positions)
        cp = np.linalg.norm(c[:, None, :] - p[None, :, :], axis=-1) <= thr
        d |= cp | cp.T
    iu = np.triu_indices(len(c), 1)
    return {(int(i), int(j)) for i, j in zip(*iu) if d[i, j]}


def _unit(theta: float) -> np.ndarray:
    return np.array([math.cos(theta), math.sin(theta)])


@dataclass(frozen=True)
class _Sensed:
    region: PolarRegion
    est: float
    bearing: float  # measured direction from robot to destination
    believed_dest: np.ndarray


def _sense(pos, dest, sensor: SensorModel, q: QuantizerSpec, g: np.random.Generator) -> _Sensed:
    rel = dest - pos
    d = math.hypot(rel[0], rel[1])
    phi = math.atan2(rel[1], rel[0])
    samples = d + sensor.sigma * g.standard_normal(sensor.n_samples)
    est = float(samples.mean())
    bearing = phi + sensor.sigma_theta * float(g.standard_normal())
    theta = (bearing + math.pi) % (2 * math.pi)
    j = quantize_sector(theta, q)
    if est > q.R:
        return _Sensed(PolarRegion(q.rings, j, outside=True), est, bearing, pos + est * _unit(bearing))
    h = quantize_ring(est, q)
    return _Sensed(PolarRegion(h, j), est, bearing, pos + q.ring_mid(h) * _unit(bearing))


def _candidate(pos, sensed: _Sensed, act: Action, q: QuantizerSpec) -> np.ndarray:
    """World point the robot heads for under ``act`` (before the speed cap)."""
    reg = sensed.region
    if act is Action.INWARD:
        # the ring-1 wedges share the destination as apex; aim there directly
        if reg.outside or reg.h <= 2:
            return sensed.believed_dest
        return sensed.believed_dest + q.ring_mid(reg.h - 1) * _unit(q.sector_mid(reg.j))
    step = 1 if act is Action.SIDE_CCW else -1
    j = (reg.j - 1 + step) % q.sectors + 1
    radius = sensed.est if reg.outside else q.ring_mid(reg.h)
    return sensed.believed_dest + radius * _unit(q.sector_mid(j))


def _evade(pos, dest, claims, current, thr2: float, u_max: float):
    """Closest-to-destination point within reach that keeps clear of every
    claim and current position in ``claims``/``current``; None if none."""
    ang = np.linspace(0.0, 2 * np.pi, 24, endpoint=False)
    best, best_d = None, math.inf
    for r in (u_max, 0.5 * u_max, 0.25 * u_max):
        pts = pos + r * np.column_stack([np.cos(ang), np.sin(ang)])
        ok = np.ones(len(pts), bool)
        for ref in (claims, current):
            ok &= np.all(np.sum((pts[:, None, :] - ref[None, :, :]) ** 2, axis=-1) > thr2, axis=1)
        for p in pts[ok]:
            d = float(np.sum((p - dest) ** 2))
            if d < best_d:
                best, best_d = p, d
    return best


def step_swarm(
    s: SwarmState,
    cfg: SimConfig,
    sensor: SensorModel,
    q: QuantizerSpec,
    rng: RngStream,
) -> tuple:
    """Advance one slot.  Returns (new state, per-robot decisions)."""
    if s.phase is not Phase.FORMING:
        raise InvalidStateError(f"step_swarm needs phase FORMING, got {s.phase}")
    n = s.n
    pos = s.positions
    arrived = s.arrived.copy()
    follows = s.graph.follows
    moved_last = np.any(s.velocities != 0.0, axis=1)
    for i in range(n):
        h = follows[i]
        if arrived[i] and h not in (i, CENTER) and moved_last[h]:
            arrived[i] = False

    dest = _destinations(pos, s.graph, s.center)
    thr2 = (2.0 * cfg.safety_radius) ** 2
    tol = cfg.arrival_tolerance
    nxt = pos.copy()
    # standing robots bind everybody; movers bind higher ids once planned
    bound = arrived.copy()
    decisions = [None] * n
    for i in range(n):
        if arrived[i]:
            decisions[i] = StepDecision(Action.ARRIVED)
            continue
        sensed = _sense(pos[i], dest[i], sensor, q, rng.child(i, s.slot).generator())
        others = np.flatnonzero(bound)
        if sensed.region.h == 1 and not sensed.region.outside and sensed.est <= tol:
            hit = others[np.sum((nxt[others] - pos[i]) ** 2, axis=1) <= thr2] if len(others) else others
            if not len(hit):
                decisions[i] = StepDecision(Action.ARRIVED, sensed.region)
                arrived[i] = True
                bound[i] = True
                continue
        blocked, blockers, points = set(), set(), {}
        claims, current = nxt[others], pos[others]
        # moves are tried in preference order; later ones only matter when
        # every earlier one is blocked
        for act in MOVES:
            p = pos[i] + cap_velocity(_candidate(pos[i], sensed, act, q) - pos[i], cfg.U_max)
            points[act] = p
            if not len(others):
                break
            dc, dp = claims - p, current - p
            hit = others[((dc * dc).sum(axis=1) <= thr2) | ((dp * dp).sum(axis=1) <= thr2)]
            if not len(hit):
                break
            blocked.add(act)
            blockers.update(int(k) for k in hit)
        region = sensed.region
        if region.h == 1 and not region.outside:
            # inside ring 1 but beyond the arrival tolerance: head straight in
            region = replace(region, h=2)
        dec = plan_step(region, frozenset(blocked), q.sectors)
        if dec.action is not Action.STOP:
            nxt[i] = points[dec.action]
        elif len(others):
            # standing still is only safe if nobody who planned first is
            # heading here; otherwise step to the nearest clear point
            hit = others[np.sum((nxt[others] - pos[i]) ** 2, axis=1) <= thr2]
            if len(hit):
                p = _evade(pos[i], dest[i], nxt[others], pos[others], thr2, cfg.U_max)
                if p is not None:
                    nxt[i] = p
                    dec = StepDecision(Action.EVADE, region)
                    blockers.update(int(k) for k in hit)
        decisions[i] = StepDecision(dec.action, dec.target, tuple(sorted(blockers)))
        bound[i] = True

    vel = nxt - pos
    new = SwarmState(s.slot + 1, nxt, vel, arrived, s.graph, s.phase, s.center)
    if arrived.all():
        new = replace(new, phase=Phase.DONE)
    return new, decisions


def _min_pair(pos: np.ndarray):
    n = len(pos)
    if n < 2:
        return math.inf, ()
    d = np.linalg.norm(pos[:, None, :] - pos[None, :, :], axis=-1)
    d[np.diag_indices(n)] = np.inf
    return float(d.min()), d


def _collisions(slot: int, pos: np.ndarray, radius: float) -> tuple:
    m, d = _min_pair(pos)
    events = []
    if m < radius:
        iu = np.triu_indices(len(pos), 1)
        for i, j in zip(*iu):
            if d[i, j] < radius:
                events.append(CollisionEvent(slot, int(i), int(j), float(d[i, j])))
    return m, events


def initial_state(positions, f: Formation, a: Assignment, center=None, slot: int = 0) -> SwarmState:
    x = as_points(positions)
    g = build_follower_graph(f, a)
    arrived = np.zeros(len(x), bool)
    if a.leader is not None:
        arrived[a.leader] = True
    return SwarmState(slot, x, np.zeros_like(x), arrived, g, Phase.FORMING,
                      None if center is None else as_point(center))


def run_to_formation(
    initial,
    f: Formation,
    cfg: SimConfig,
    sensor: SensorModel,
    q: QuantizerSpec,
    rng: RngStream,
    center=None,
    assignment: Optional[Assignment] = None,
    record_decisions: bool = False,
    start_slot: int = 0,
) -> Trajectory:
    """Simulate until every robot has arrived or ``cfg.max_slots`` elapse.

    ``center=None`` selects leader mode.  When ``assignment`` is omitted it is
    computed with the Hungarian method for the chosen mode.  Non-convergence
    is reported through ``Trajectory.converged``.
    """
    x = as_points(initial)
    if assignment is None:
        res = assign_with_leader(x, f) if center is None else assign_with_center(x, f, center)
        assignment, est = res.assignment, res.total_cost
    else:
        est = _estimated_cost(x, f, assignment, center)
    if center is None and assignment.leader is None:
        raise InvalidInputError("leader mode needs an assignment with a leader")
    s = initial_state(x, f, assignment, center, start_slot)
    states = [s]
    m, collisions = _collisions(s.slot, s.positions, cfg.safety_radius)
    decisions = []
    lengths = np.zeros(len(x))
    while s.phase is not Phase.DONE and s.slot - start_slot < cfg.max_slots:
        s, dec = step_swarm(s, cfg, sensor, q, rng)
        lengths += np.linalg.norm(s.velocities, axis=1)
        states.append(s)
        if record_decisions:
            decisions.append(dec)
        mm, ev = _collisions(s.slot, s.positions, cfg.safety_radius)
        m = min(m, mm)
        collisions.extend(ev)
    return Trajectory(states, lengths, collisions, decisions, s.phase is Phase.DONE,
                      est, assignment, f, m)


def _estimated_cost(x, f: Formation, a: Assignment, center) -> float:
    from .assignment import leader_cost
    from .formations import center_cost

    if center is None:
        return leader_cost(x, f, a)
    return center_cost(x, f, a.mapping, center)


def approach_center(s: SwarmState, c, d0: float, cfg: SimConfig) -> list:
    """Translate the whole group at U_max toward ``c`` until its centroid is
    within ``d0`` of it.  Returns the visited states, starting with ``s``;
    the last one is in phase FORMING."""
    c = as_point(c)
    states = [s]
    pos = s.positions
    slot = s.slot
    while True:
        gap = c - pos.mean(axis=0)
        if math.hypot(gap[0], gap[1]) <= d0:
            break
        v = gap / math.hypot(gap[0], gap[1]) * cfg.U_max
        pos = pos + v
        slot += 1
        states.append(replace(s, slot=slot, positions=pos, velocities=np.broadcast_to(v, pos.shape),
                              phase=Phase.APPROACH_CENTER))
    states[-1] = replace(states[-1], phase=Phase.FORMING)
    return states


def convert_formation(
    positions,
    f: Formation,
    cfg: SimConfig,
    sensor: SensorModel,
    q: QuantizerSpec,
    rng: RngStream,
    center=None,
    d0: Optional[float] = None,
    start_slot: int = 0,
) -> Trajectory:
    """Move from the current positions into formation ``f`` around a center.

    ``center=None`` picks the cost-optimal center (the current centroid).  A
    given center farther than ``d0`` (default R/2) from the centroid is first
    approached by translating the whole group.  ``estimated_cost`` is the
    straight-line cost from the starting positions.
    """
    x = as_points(positions)
    if center is None:
        center = optimal_center(x)
    c = as_point(center)
    d0 = cfg.R / 2 if d0 is None else d0
    est = assign_with_center(x, f, c).total_cost
    dummy = SwarmState(start_slot, x, np.zeros_like(x), np.zeros(len(x), bool),
                       FollowerGraph((CENTER,) * len(x), np.zeros_like(x)), Phase.APPROACH_CENTER, c)
    pre = approach_center(dummy, c, d0, cfg)
    moved = pre[-1].positions
    traj = run_to_formation(moved, f, cfg, sensor, q, rng, center=c, start_slot=pre[-1].slot)
    if len(pre) > 1:
        traj.path_lengths = traj.path_lengths + cfg.U_max * (len(pre) - 1)
        traj.states = pre[:-1] + traj.states
    traj.estimated_cost = est
    return traj

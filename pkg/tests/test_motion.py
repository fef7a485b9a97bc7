import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from formation_lab.assignment import assign_with_center, assign_with_leader
from formation_lab.core import CENTER, Assignment, Formation, InvalidStateError, RngStream, SimConfig
from formation_lab.formations import FormationSpec, Shape, circle_formation, square_formation
from formation_lab.motion import (
    Action,
    Phase,
    PolarRegion,
    SwarmState,
    approach_center,
    build_follower_graph,
    convert_formation,
    current_destination,
    detect_conflicts,
    ideal_destinations,
    initial_state,
    plan_step,
    run_to_formation,
    step_swarm,
    target_region,
)
from formation_lab.sensing import QuantizerSpec, SensorModel, quantize_ring

CFG = SimConfig(U_max=10, R=300, n_r=128, n_theta=73, safety_radius=1.0)
Q = QuantizerSpec(300, 128, 73, 120)
QUIET = SensorModel(1e-12, 1, 0.0)
NOISY = SensorModel(1.0, 10, 0.0)


def spread_start(seed, n=15, box=300.0, sep=4.0):
    g = np.random.default_rng(seed)
    pts = []
    while len(pts) < n:
        p = g.random(2) * box
        if all(np.hypot(*(p - q)) >= sep for q in pts):
            pts.append(p)
    return np.array(pts)


# --- follower graph -------------------------------------------------------


def test_graph_two_robots():
    f = Formation([(0, 1), (0, -1)])
    a = Assignment((1, 0), leader=1, leader_slot=0)
    g = build_follower_graph(f, a)
    assert g.follows == (1, 1)
    # offset = own slot minus the reference's slot, so reference + offset
    # is the follower's place in the formation
    np.testing.assert_allclose(g.offsets[0], f.slots[1] - f.slots[0])
    np.testing.assert_allclose(g.offsets[1], 0)


def test_graph_center_mode():
    f = circle_formation(5, 100)
    a = Assignment((3, 1, 4, 0, 2))
    g = build_follower_graph(f, a)
    assert g.follows == (CENTER,) * 5
    np.testing.assert_allclose(g.offsets, f.slots[list(a.mapping)])


def test_graph_square8_hand_bfs():
    f = square_formation(8, 4)
    # slots walk clockwise from the top middle at unit spacing; with k=3 the
    # kNN graph is the perimeter cycle plus cross links at distance sqrt(2)
    a = Assignment(tuple(range(8)), leader=0, leader_slot=0)
    g = build_follower_graph(f, a)
    assert g.follows[1] == 0 and g.follows[7] == 0
    depths = [g.depth(i) for i in range(8)]
    # hand BFS: 0 -> {1, 7, 2|6 via sqrt(2) links} -> ...
    d = np.linalg.norm(f.slots[:, None] - f.slots[None], axis=-1)
    adj = [set() for _ in range(8)]
    for i in range(8):
        for j in sorted(range(8), key=lambda j: (d[i, j], j))[1:4]:
            adj[i].add(j)
            adj[j].add(i)
    level, frontier, seen = {0: 0}, [0], {0}
    while frontier:
        nxt = []
        for u in frontier:
            for v in sorted(adj[u]):
                if v not in seen:
                    seen.add(v)
                    level[v] = level[u] + 1
                    nxt.append(v)
        frontier = nxt
    assert depths == [level[i] for i in range(8)]


@given(st.integers(0, 10**6), st.integers(3, 20))
def test_graph_acyclic_and_fixed_point(seed, n):
    g = np.random.default_rng(seed)
    f = Formation.centered(g.random((n, 2)) * 100 + np.arange(n)[:, None] * 1e-3)
    perm = tuple(int(v) for v in g.permutation(n))
    lead = int(g.integers(n))
    a = Assignment(perm, lead, perm[lead])
    G = build_follower_graph(f, a)
    assert G.leader == lead
    for i in range(n):
        assert G.depth(i) <= n
    # robots standing exactly on their slots satisfy x_i - x_{h_i} = p_i
    x = f.slots[list(perm)] + (5, 7)
    for i in range(n):
        np.testing.assert_allclose(x[i] - x[G.follows[i]], G.offsets[i], atol=1e-9)


def test_current_destination_examples():
    G_c = build_follower_graph(Formation([(1, 0), (-1, 0)]), Assignment((0, 1)))
    s = SwarmState(0, np.zeros((2, 2)), np.zeros((2, 2)), np.zeros(2, bool), G_c, center=np.array([5.0, 5.0]))
    np.testing.assert_allclose(current_destination(0, s), (6, 5))
    s_nc = SwarmState(0, np.zeros((2, 2)), np.zeros((2, 2)), np.zeros(2, bool), G_c)
    with pytest.raises(InvalidStateError):
        current_destination(0, s_nc)
    from formation_lab.core import FollowerGraph

    G = FollowerGraph((0, 0), np.array([(0, 0), (-2, 0)], float))
    s = SwarmState(0, np.array([(10, 0), (3, 3)], float), np.zeros((2, 2)), np.zeros(2, bool), G)
    np.testing.assert_allclose(current_destination(1, s), (8, 0))


# --- planning -------------------------------------------------------------


def test_plan_step_examples():
    assert plan_step(PolarRegion(1, 4), {Action.INWARD}).action is Action.ARRIVED
    d = plan_step(PolarRegion(3, 5))
    assert d.action is Action.INWARD and d.target == PolarRegion(2, 5)
    d = plan_step(PolarRegion(3, 5), {Action.INWARD})
    assert d.action is Action.SIDE_CCW and d.target == PolarRegion(3, 6)
    d = plan_step(PolarRegion(3, 5), {Action.INWARD, Action.SIDE_CCW})
    assert d.action is Action.SIDE_CW and d.target == PolarRegion(3, 4)
    assert plan_step(PolarRegion(3, 5), {Action.INWARD, Action.SIDE_CCW, Action.SIDE_CW}).action is Action.STOP


def test_target_region_wraps():
    assert target_region(PolarRegion(4, 72), Action.SIDE_CCW, 72) == PolarRegion(4, 1)
    assert target_region(PolarRegion(4, 1), Action.SIDE_CW, 72) == PolarRegion(4, 72)
    assert target_region(PolarRegion(4, 1, True), Action.INWARD, 72) == PolarRegion(4, 1, True)


def test_detect_conflicts_examples():
    r = 1.0
    assert detect_conflicts([(0, 0), (5, 0)], r) == set()
    assert detect_conflicts([(0, 0), (0, 0)], r) == {(0, 1)}
    assert detect_conflicts([(0, 0), (2, 0)], r) == {(0, 1)}
    assert detect_conflicts([(0, 0), (9, 0)], r, positions=[(9, 1.5), (20, 0)]) == {(0, 1)}


# --- stepping -------------------------------------------------------------


def _single(start, dest, cfg=CFG, sensor=QUIET):
    f = Formation([(0.0, 0.0)])
    s = initial_state([start], f, Assignment((0,)), center=dest)
    return s, f


def test_single_robot_three_rings_away():
    w = CFG.ring_width
    s, _ = _single((2.5 * w, 0.0), (0.0, 0.0))
    assert quantize_ring(2.5 * w, Q) == 3
    kinds = []
    for _ in range(4):
        s, dec = step_swarm(s, CFG, QUIET, Q, RngStream(0))
        kinds.append(dec[0].action)
        if s.phase is Phase.DONE:
            break
    assert kinds == [Action.INWARD, Action.INWARD, Action.ARRIVED]
    assert np.hypot(*s.positions[0]) < 1e-6


def test_progress_ring_non_increasing():
    w = CFG.ring_width
    s, _ = _single((200.0, 90.0), (0.0, 0.0))
    rings = [quantize_ring(np.hypot(*s.positions[0]), Q)]
    while s.phase is not Phase.DONE:
        s, _ = step_swarm(s, CFG, QUIET, Q, RngStream(1))
        rings.append(quantize_ring(np.hypot(*s.positions[0]), Q))
    assert all(b <= a for a, b in zip(rings, rings[1:]))
    k = math.ceil(w / CFG.U_max)
    moving = rings[:-1]
    assert all(moving[i + k] < moving[i] for i in range(len(moving) - k) if moving[i] > 1)


def test_outside_R_moves_straight_at_full_speed():
    s, _ = _single((1000.0, 0.0), (0.0, 0.0))
    s2, dec = step_swarm(s, CFG, QUIET, Q, RngStream(0))
    np.testing.assert_allclose(s2.positions[0], (990, 0), atol=1e-6)
    assert dec[0].target.outside


def test_all_in_ring_one_is_fixed_point():
    f = circle_formation(5, 1000)
    c = np.array([3.0, 4.0])
    x = c + f.slots + 0.1
    s = initial_state(x, f, Assignment(tuple(range(5))), center=c)
    s2, dec = step_swarm(s, CFG, QUIET, Q, RngStream(0))
    np.testing.assert_array_equal(s2.positions, s.positions)
    assert s2.arrived.all() and s2.phase is Phase.DONE
    assert not s2.velocities.any()


def test_step_requires_forming():
    f = Formation([(0.0, 0.0)])
    s = initial_state([(1, 1)], f, Assignment((0,)), center=(0, 0))
    from dataclasses import replace

    with pytest.raises(InvalidStateError):
        step_swarm(replace(s, phase=Phase.DONE), CFG, QUIET, Q, RngStream(0))


def test_standing_robot_is_avoided():
    # robot 0 already stands on its slot, right on robot 1's straight path
    f = Formation([(-10.0, 0.0), (10.0, 0.0)])
    x = np.array([(-10.0, 0.0), (-40.0, 0.0)])
    tr = run_to_formation(x, f, CFG, QUIET, Q, RngStream(0), center=(0, 0),
                          assignment=Assignment((0, 1)), record_decisions=True)
    assert tr.converged and not tr.collisions
    assert tr.min_distance >= CFG.safety_radius
    assert {d[0].action for d in tr.decisions} == {Action.ARRIVED}
    yields = [d[1] for d in tr.decisions if d[1].blockers]
    assert yields and all(d.blockers == (0,) for d in yields)
    assert all(d.action is not Action.INWARD for d in yields)


# --- full runs ------------------------------------------------------------


def test_on_slots_converges_immediately():
    f = square_formation(15, 28800)
    x = f.slots + (150, 150)
    tr = run_to_formation(x, f, CFG, NOISY, Q, RngStream(0))
    assert tr.converged and tr.slots <= 2
    assert tr.practical_cost < 1e-6


@pytest.fixture(scope="module")
def leader_run():
    x = spread_start(0)
    return run_to_formation(x, square_formation(15, 28800), CFG, NOISY, Q, RngStream(0), record_decisions=True)


def test_leader_run_properties(leader_run):
    tr = leader_run
    assert tr.converged
    assert tr.practical_cost > tr.estimated_cost
    assert tr.collisions == [] and tr.min_distance >= CFG.safety_radius
    lead = tr.assignment.leader
    np.testing.assert_array_equal(tr.states[0].positions[lead], tr.final.positions[lead])
    for s in tr.states:
        assert np.all(np.linalg.norm(s.velocities, axis=1) <= CFG.U_max + 1e-9)
        assert not s.velocities[s.arrived].any()


def test_leader_run_fixed_point(leader_run):
    s = leader_run.final
    g = s.graph
    for i in range(s.n):
        if g.follows[i] != i:
            err = np.hypot(*(s.positions[i] - s.positions[g.follows[i]] - g.offsets[i]))
            assert err <= CFG.arrival_tolerance + CFG.ring_width


def test_priority_rule_from_logs(leader_run):
    tr = leader_run
    for k, dec in enumerate(tr.decisions):
        standing = tr.states[k].arrived
        for i, d in enumerate(dec):
            for j in d.blockers:
                # a robot only yields to lower ids or to robots standing still
                assert j < i or standing[j] or dec[j].action is Action.ARRIVED


def test_determinism():
    x = spread_start(3)
    a = run_to_formation(x, square_formation(15, 28800), CFG, NOISY, Q, RngStream(3))
    b = run_to_formation(x, square_formation(15, 28800), CFG, NOISY, Q, RngStream(3))
    assert len(a.states) == len(b.states)
    for s, t in zip(a.states, b.states):
        np.testing.assert_array_equal(s.positions, t.positions)
    np.testing.assert_array_equal(a.path_lengths, b.path_lengths)


def test_nonconvergence_is_reported():
    cfg = SimConfig(U_max=10, R=300, n_r=128, n_theta=73, max_slots=3)
    tr = run_to_formation(spread_start(1), square_formation(15, 28800), cfg, NOISY, Q, RngStream(0))
    assert not tr.converged and tr.slots == 3


def test_center_run_cost_close_to_estimate():
    x = spread_start(5)
    c = x.mean(axis=0)
    tr = run_to_formation(x, circle_formation(15, 28800), CFG, NOISY, Q, RngStream(5), center=c)
    assert tr.converged and not tr.collisions
    assert abs(tr.practical_cost / tr.estimated_cost - 1) <= 0.10
    np.testing.assert_allclose(ideal_destinations(tr.final), c + tr.formation.slots[list(tr.assignment.mapping)])
    assert tr.formation_bias < CFG.ring_width


# --- approach and conversion ----------------------------------------------


def _dummy(x, c):
    from formation_lab.core import FollowerGraph

    n = len(x)
    return SwarmState(0, x, np.zeros_like(x), np.zeros(n, bool),
                      FollowerGraph((CENTER,) * n, np.zeros((n, 2))), Phase.APPROACH_CENTER, np.asarray(c, float))


def test_approach_center_examples():
    x = np.array([(-1.0, 0.0), (1.0, 0.0)])
    st_ = approach_center(_dummy(x, (0, 0)), (0, 0), 5, CFG)
    assert len(st_) == 1 and st_[-1].phase is Phase.FORMING
    cfg = SimConfig(U_max=1, R=300, n_r=128)
    st_ = approach_center(_dummy(x, (10, 0)), (10, 0), 5, cfg)
    assert len(st_) - 1 == 5
    np.testing.assert_allclose(st_[-1].positions.mean(axis=0), (5, 0))
    assert st_[-1].phase is Phase.FORMING and st_[1].phase is Phase.APPROACH_CENTER


def test_convert_auto_center_is_centroid():
    x = spread_start(8)
    tr = convert_formation(x, circle_formation(15, 28800), CFG, NOISY, Q, RngStream(8))
    np.testing.assert_allclose(tr.final.center, x.mean(axis=0))
    assert tr.estimated_cost == pytest.approx(assign_with_center(x, circle_formation(15, 28800), x.mean(axis=0)).total_cost)


def test_convert_identical_formation_costs_nothing():
    f = FormationSpec(Shape.TRIANGLE, 15, 28800).build()
    x = f.slots + (100, 50)
    tr = convert_formation(x, f, CFG, NOISY, Q, RngStream(0))
    assert tr.estimated_cost == pytest.approx(0, abs=1e-9)
    assert tr.practical_cost < 1e-6


def test_convert_faraway_two_phase():
    x = spread_start(2)
    f = circle_formation(15, 28800)
    tr = convert_formation(x, f, CFG, NOISY, Q, RngStream(2), center=(-300, 0))
    assert tr.converged and not tr.collisions
    phases = [s.phase for s in tr.states]
    assert phases[0] is Phase.APPROACH_CENTER and phases[-1] is Phase.DONE
    assert 1.0 <= tr.practical_cost / tr.estimated_cost <= 1.10

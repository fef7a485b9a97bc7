import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from formation_lab.core import Formation, InvalidInputError, InvalidSpecError
from formation_lab.formations import (
    FormationSpec,
    Shape,
    center_cost,
    circle_formation,
    default_bottom_count,
    leading_slot,
    optimal_center,
    square_formation,
    triangle_formation,
)


def test_circle_n4():
    f = circle_formation(4, math.pi)
    np.testing.assert_allclose(f.slots, [(1, 0), (0, 1), (-1, 0), (0, -1)], atol=1e-12)


def test_circle_n3_angles():
    f = circle_formation(3, math.pi)
    expect = [0, 2 * np.pi / 3, 4 * np.pi / 3]
    np.testing.assert_allclose(f.slots, np.column_stack([np.cos(expect), np.sin(expect)]), atol=1e-12)
    np.testing.assert_allclose(np.linalg.norm(f.slots, axis=1), 1)


def test_circle_demo_radius():
    f = circle_formation(15, 28800)
    np.testing.assert_allclose(np.linalg.norm(f.slots, axis=1), 95.7461, atol=1e-4)
    np.testing.assert_allclose(f.slots.sum(axis=0), 0, atol=1e-9)


def test_square_n4():
    f = square_formation(4, 4)
    np.testing.assert_allclose(f.slots, [(0, 1), (1, 0), (0, -1), (-1, 0)], atol=1e-12)


def test_square_n8_hand_enumerated():
    f = square_formation(8, 4)
    expect = [(0, 1), (1, 1), (1, 0), (1, -1), (0, -1), (-1, -1), (-1, 0), (-1, 1)]
    np.testing.assert_allclose(f.slots, expect, atol=1e-12)


def test_square_demo_on_perimeter():
    f = square_formation(15, 28800)
    side = math.sqrt(28800)
    assert side == pytest.approx(169.7056, abs=1e-4)
    # recentering shifts the outline by the mean of the uncentered points
    raw = f.slots + (np.array([0, side / 2]) - f.slots[0])
    on_edge = np.isclose(np.abs(raw).max(axis=1), side / 2)
    assert on_edge.all()
    gaps = np.linalg.norm(np.diff(np.vstack([f.slots, f.slots[:1]]), axis=0), axis=1)
    # corners shorten the straight-line gap; arc spacing is 4*side/15
    assert gaps.max() == pytest.approx(4 * side / 15)


@pytest.mark.parametrize("n", [3, 2])
def test_square_too_small(n):
    with pytest.raises(InvalidSpecError):
        square_formation(n, 1)


def test_circle_bad():
    with pytest.raises(InvalidSpecError):
        circle_formation(2, 1)
    with pytest.raises(InvalidSpecError):
        circle_formation(5, 0)


def _edge_counts(f, A, B, C):
    def on(p, q, r):
        u, v = q - p, r - p
        return abs(u[0] * v[1] - u[1] * v[0]) < 1e-9 and np.dot(r - p, r - q) < -1e-9

    s = f.slots
    return (sum(on(A, B, r) for r in s), sum(on(A, C, r) for r in s), sum(on(B, C, r) for r in s))


def test_triangle_n15():
    a = b = math.sqrt(28800)
    f = triangle_formation(15, a, b, 4)
    assert len(f) == 15
    A, B, C = f.slots[:3]
    assert _edge_counts(f, A, B, C) == (4, 4, 4)
    np.testing.assert_allclose(np.linalg.norm(A - (B + C) / 2), a)
    np.testing.assert_allclose(np.linalg.norm(C - B), 2 * b)


def test_triangle_vertices_only():
    f = triangle_formation(3, 3.0, 1.0, 0)
    np.testing.assert_allclose(f.slots, [(0, 2), (-1, -1), (1, -1)], atol=1e-12)


def test_triangle_n6_apex_and_base():
    # AD = 6 so d = 2: apex (0, 4), base at y = -2 before recentering
    f = triangle_formation(6, 6.0, 3.0, 1)
    raw = np.array([(0, 4), (-3, -2), (3, -2), (-1.5, 1), (1.5, 1), (0, -2)], float)
    np.testing.assert_allclose(f.slots, raw - raw.mean(axis=0), atol=1e-12)


@pytest.mark.parametrize("n, y", [(15, 3), (6, 2), (5, 3)])
def test_triangle_parity(n, y):
    with pytest.raises(InvalidSpecError):
        triangle_formation(n, 1, 1, y)
    with pytest.raises(InvalidSpecError):
        FormationSpec(Shape.TRIANGLE, n, 10.0, y)


@given(st.integers(3, 40))
def test_default_bottom_count_valid(n):
    y = default_bottom_count(n, 1.0, 1.0)
    assert y >= 0 and (n - 3 - y) >= 0 and (n - 3 - y) % 2 == 0


@pytest.mark.parametrize("shape", list(Shape))
@pytest.mark.parametrize("n", [4, 7, 15, 20])
def test_spec_build_zero_centroid_distinct(shape, n):
    f = FormationSpec(shape, n, 28800).build()
    assert len(f) == n
    np.testing.assert_allclose(f.slots.sum(axis=0), 0, atol=1e-8)
    d = np.linalg.norm(f.slots[:, None] - f.slots[None], axis=-1) + np.eye(n) * 1e9
    assert d.min() > 1.0


def test_leading_slot_examples():
    assert tuple(square_formation(4, 4).slots[leading_slot(square_formation(4, 4))]) == pytest.approx((0, 1))
    c = circle_formation(4, math.pi)
    np.testing.assert_allclose(c.slots[leading_slot(c)], (0, 1), atol=1e-12)
    f = Formation([(1, 1), (-1, 1), (0, -2)])
    assert leading_slot(f) == 1


def test_leading_slot_square_top_middle():
    f = square_formation(15, 28800)
    assert leading_slot(f) == 0


@pytest.mark.parametrize("pts, c", [([(0, 0), (2, 0), (1, 3)], (1, 1)), ([(7, -2)], (7, -2))])
def test_optimal_center_examples(pts, c):
    np.testing.assert_allclose(optimal_center(pts), c)


def test_optimal_center_empty():
    with pytest.raises(InvalidInputError):
        optimal_center(np.zeros((0, 2)))


@given(st.integers(0, 10**6))
def test_optimal_center_grid_oracle(seed):
    g = np.random.default_rng(seed)
    x = g.random((5, 2)) * 100
    f = FormationSpec(Shape.CIRCLE, 5, 500.0).build()
    m = tuple(g.permutation(5))
    c = optimal_center(x)
    ax = np.linspace(-10, 10, 201)
    best = min(((center_cost(x, f, m, c + (u, v)), u, v) for u in ax[::20] for v in ax[::20]))
    assert best[1] == 0 and best[2] == 0

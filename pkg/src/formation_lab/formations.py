"""Square, circle and triangle formation generators and the conversion center."""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .core import Formation, InvalidInputError, InvalidSpecError, as_points


class Shape(enum.Enum):
    SQUARE = "square"
    CIRCLE = "circle"
    TRIANGLE = "triangle"


@dataclass(frozen=True)
class FormationSpec:
    shape: Shape
    n: int
    area: float
    triangle_bottom_count: Optional[int] = None

    def __post_init__(self):
        object.__setattr__(self, "shape", Shape(self.shape))
        if self.n < 3 or self.area <= 0:
            raise InvalidSpecError("need n >= 3 and area > 0")
        y = self.triangle_bottom_count
        if self.shape is Shape.TRIANGLE and y is not None:
            if y < 0 or (self.n - 3 - y) < 0 or (self.n - 3 - y) % 2:
                raise InvalidSpecError(f"n - 3 - bottom_count must be even and >= 0 (n={self.n}, y={y})")

    def build(self) -> Formation:
        if self.shape is Shape.CIRCLE:
            return circle_formation(self.n, self.area)
        if self.shape is Shape.SQUARE:
            return square_formation(self.n, self.area)
        side = math.sqrt(self.area)
        y = self.triangle_bottom_count
        if y is None:
            y = default_bottom_count(self.n, side, side)
        return triangle_formation(self.n, side, side, y)


def circle_formation(n: int, area: float) -> Formation:
    """n points evenly spaced counterclockwise on the circle of area ``area``,
    slot 0 on the positive x-axis."""
    if n < 3 or area <= 0:
        raise InvalidSpecError("circle formation needs n >= 3 and area > 0")
    r = math.sqrt(area / math.pi)
    ang = 2.0 * np.pi * np.arange(n) / n
    pts = r * np.column_stack([np.cos(ang), np.sin(ang)])
    return Formation(pts - pts.mean(axis=0))


def square_formation(n: int, area: float) -> Formation:
    """n points evenly spaced along the outline of an axis-aligned square.

    Slot 0 sits at the middle of the top edge and the walk proceeds
    clockwise.  The point set is recentered, which only moves anything when
    n is not a multiple of 4.
    """
    if n < 4 or area <= 0:
        raise InvalidSpecError("square formation needs n >= 4 and area > 0")
    s = math.sqrt(area)
    h = s / 2
    # corners in clockwise order starting from the top-middle point
    path = np.array([[0, h], [h, h], [h, -h], [-h, -h], [-h, h], [0, h]])
    seg = np.linalg.norm(np.diff(path, axis=0), axis=1)
    cum = np.concatenate([[0.0], np.cumsum(seg)])
    t = np.arange(n) * (4 * s / n)
    pts = np.empty((n, 2))
    for k, tk in enumerate(t):
        i = min(int(np.searchsorted(cum, tk, side="right")) - 1, len(seg) - 1)
        u = (tk - cum[i]) / seg[i]
        pts[k] = path[i] + u * (path[i + 1] - path[i])
    return Formation(pts - pts.mean(axis=0))


def default_bottom_count(n: int, area_a: float, area_b: float) -> int:
    """Base-edge robot count that makes waist and base spacing most alike."""
    waist = math.hypot(area_a, area_b)
    base = 2 * area_b
    best, best_gap = None, math.inf
    for y in range((n - 3) % 2, n - 2, 2):
        x = (n - 3 - y) // 2
        gap = abs(waist / (x + 1) - base / (y + 1))
        if gap < best_gap - 1e-12:
            best, best_gap = y, gap
    if best is None:
        raise InvalidSpecError(f"no triangle decomposition for n={n}")
    return best


def triangle_formation(n: int, area_a: float, area_b: float, bottom_count: int) -> Formation:
    """Isosceles triangle with apex height ``area_a`` and base ``2 * area_b``.

    Slots 0, 1, 2 are the apex A and base corners B and C.  Then come the
    waist robots on AB, those on AC, and finally the base robots, all evenly
    spaced strictly inside their edges.  The triangle is built with its
    geometric centroid at the origin (AO = 2 OD) and the full point set is
    then recentered to zero mean.
    """
    x2 = n - 3 - bottom_count
    if area_a <= 0 or area_b <= 0 or n < 3:
        raise InvalidSpecError("triangle needs positive sizes and n >= 3")
    if bottom_count < 0 or x2 < 0 or x2 % 2:
        raise InvalidSpecError(f"n - 3 - bottom_count must be even and >= 0 (n={n}, y={bottom_count})")
    x = x2 // 2
    d = area_a / 3.0
    A = np.array([0.0, 2 * d])
    B = np.array([-area_b, -d])
    C = np.array([area_b, -d])

    def inner(p, q, k):
        u = np.arange(1, k + 1) / (k + 1)
        return p + u[:, None] * (q - p)

    pts = np.vstack([A, B, C, inner(A, B, x), inner(A, C, x), inner(B, C, bottom_count)])
    return Formation(pts - pts.mean(axis=0))


def leading_slot(f: Formation) -> int:
    """Index of the slot with maximum y.

    Ties go to the slot nearest the vertical axis, then to smaller x, then to
    the smaller index, so the top-middle point of a square wins.
    """
    s = f.slots
    if len(s) == 0:
        raise InvalidInputError("empty formation")
    return min(range(len(s)), key=lambda i: (-s[i, 1], abs(s[i, 0]), s[i, 0], i))


def optimal_center(initial_positions) -> np.ndarray:
    """Center minimizing the total squared straight-line move for any
    zero-centroid formation: the mean of the current positions."""
    p = as_points(initial_positions)
    if len(p) == 0:
        raise InvalidInputError("no positions")
    return p.mean(axis=0)


def center_cost(initial_positions, f: Formation, mapping, c) -> float:
    """Total squared move sum ||x_i - f_{d_i} - c||^2 for a fixed arrangement."""
    p = as_points(initial_positions)
    diff = p - f.slots[np.asarray(mapping)] - np.asarray(c, dtype=float)
    return float(np.sum(diff * diff))

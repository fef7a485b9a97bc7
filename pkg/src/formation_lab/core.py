"""Shared geometric types, the slot kinematic model and the seeded RNG contract.

Robots and formation slots are indexed from 0 throughout the package.
Positions are handled as float64 numpy arrays; ``Vec2`` is the scalar
value type used at API boundaries.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Optional, Sequence

import numpy as np


class InvalidInputError(ValueError):
    """Raised when an operation receives malformed or non-finite input."""


class InvalidSpecError(ValueError):
    """Raised when a formation or configuration spec is inconsistent."""


class InvalidStateError(RuntimeError):
    """Raised when a simulation state lacks what an operation needs."""


# Sentinel reference index meaning "follow the formation center".
CENTER = -1


@dataclass(frozen=True)
class Vec2:
    x: float
    y: float

    def __post_init__(self):
        if not (np.isfinite(self.x) and np.isfinite(self.y)):
            raise InvalidInputError(f"non-finite vector ({self.x}, {self.y})")

    @classmethod
    def of(cls, v) -> "Vec2":
        a = as_point(v)
        return cls(float(a[0]), float(a[1]))

    def __array__(self, dtype=None, copy=None):
        return np.array([self.x, self.y], dtype=dtype or float)

    def __iter__(self):
        yield self.x
        yield self.y

    def norm(self) -> float:
        return float(np.hypot(self.x, self.y))


def as_point(v) -> np.ndarray:
    a = np.asarray(v, dtype=float).reshape(-1)
    if a.shape != (2,):
        raise InvalidInputError(f"expected a 2-vector, got shape {np.shape(v)}")
    if not np.all(np.isfinite(a)):
        raise InvalidInputError("non-finite vector")
    return a


def as_points(pts) -> np.ndarray:
    """Coerce a sequence of 2-vectors into a finite (n, 2) float array."""
    a = np.asarray(pts, dtype=float)
    if a.ndim == 1 and a.size == 0:
        a = a.reshape(0, 2)
    if a.ndim != 2 or a.shape[1] != 2:
        raise InvalidInputError(f"expected an (n, 2) array, got shape {a.shape}")
    if not np.all(np.isfinite(a)):
        raise InvalidInputError("non-finite coordinates")
    return a


@dataclass(frozen=True)
class RobotState:
    id: int
    position: np.ndarray
    velocity: np.ndarray = field(default_factory=lambda: np.zeros(2))
    arrived: bool = False

    def __post_init__(self):
        object.__setattr__(self, "position", as_point(self.position))
        object.__setattr__(self, "velocity", as_point(self.velocity))
        if self.arrived and np.any(self.velocity != 0.0):
            raise InvalidInputError("an arrived robot must have zero velocity")


@dataclass(frozen=True)
class Formation:
    """Ordered slot coordinates with zero centroid."""

    slots: np.ndarray

    def __post_init__(self):
        s = as_points(self.slots).copy()
        if len(s) < 1:
            raise InvalidSpecError("a formation needs at least one slot")
        if np.any(np.abs(s.sum(axis=0)) > 1e-9 * max(1.0, len(s) * np.abs(s).max())):
            raise InvalidSpecError("formation slots must have zero centroid")
        if len(s) > 1:
            d = np.linalg.norm(s[:, None, :] - s[None, :, :], axis=-1)
            d[np.diag_indices(len(s))] = np.inf
            if d.min() <= 0.0:
                raise InvalidSpecError("formation slots must be pairwise distinct")
        s.setflags(write=False)
        object.__setattr__(self, "slots", s)

    @classmethod
    def centered(cls, pts) -> "Formation":
        """Build a formation from raw points, shifting them to zero centroid."""
        p = as_points(pts)
        return cls(p - p.mean(axis=0))

    def __len__(self) -> int:
        return len(self.slots)


@dataclass(frozen=True)
class Assignment:
    """Robot -> slot permutation, plus the leader when one is used."""

    mapping: tuple
    leader: Optional[int] = None
    leader_slot: Optional[int] = None

    def __post_init__(self):
        m = tuple(int(j) for j in self.mapping)
        if sorted(m) != list(range(len(m))):
            raise InvalidInputError(f"mapping {m} is not a permutation")
        if (self.leader is None) != (self.leader_slot is None):
            raise InvalidInputError("leader and leader_slot must be given together")
        if self.leader is not None and m[self.leader] != self.leader_slot:
            raise InvalidInputError("mapping[leader] must equal leader_slot")
        object.__setattr__(self, "mapping", m)

    def __len__(self) -> int:
        return len(self.mapping)

    def inverse(self) -> tuple:
        inv = [0] * len(self.mapping)
        for i, j in enumerate(self.mapping):
            inv[j] = i
        return tuple(inv)


@dataclass(frozen=True)
class FollowerGraph:
    """Per-robot reference index and required offset.

    ``follows[i]`` is the robot that robot ``i`` tracks, ``CENTER`` for the
    formation center, or ``i`` itself for the leader.  ``offsets[i]`` is the
    position robot ``i`` must hold relative to its reference, so the current
    destination is ``reference + offsets[i]``.
    """

    follows: tuple
    offsets: np.ndarray

    def __post_init__(self):
        o = as_points(self.offsets).copy()
        o.setflags(write=False)
        object.__setattr__(self, "offsets", o)
        object.__setattr__(self, "follows", tuple(int(h) for h in self.follows))

    @property
    def leader(self) -> Optional[int]:
        for i, h in enumerate(self.follows):
            if h == i:
                return i
        return None

    def depth(self, i: int) -> int:
        d = 0
        while self.follows[i] not in (i, CENTER):
            i = self.follows[i]
            d += 1
            if d > len(self.follows):
                raise InvalidStateError("follower graph contains a cycle")
        return d


@dataclass(frozen=True)
class SimConfig:
    U_max: float = 10.0
    R: float = 300.0
    n_r: int = 128
    n_theta: int = 73
    safety_radius: float = 1.0
    arrival_tolerance: Optional[float] = None  # defaults to one ring width
    max_slots: int = 3000
    seed: int = 0

    def __post_init__(self):
        if self.U_max <= 0 or self.R <= 0 or self.safety_radius <= 0 or self.max_slots <= 0:
            raise InvalidSpecError("U_max, R, safety_radius and max_slots must be positive")
        if self.n_r < 2 or self.n_theta < 3:
            raise InvalidSpecError("need n_r >= 2 and n_theta >= 3")
        if self.arrival_tolerance is None:
            object.__setattr__(self, "arrival_tolerance", self.ring_width)
        if not 0 < self.arrival_tolerance <= self.ring_width * (1 + 1e-12):
            raise InvalidSpecError("arrival_tolerance must lie in (0, R/(n_r-1)]")
        if not 0 <= int(self.seed) < 2**64:
            raise InvalidSpecError("seed must be an unsigned 64-bit integer")

    @property
    def ring_width(self) -> float:
        return self.R / (self.n_r - 1)


class RngStream:
    """Deterministic stream addressed by (seed, key path).

    ``child`` derives an independent stream by extending the key path, so
    per-robot and per-slot draws never depend on evaluation order.
    """

    __slots__ = ("seed", "key")

    def __init__(self, seed: int, key: Sequence[int] = ()):
        self.seed = int(seed)
        self.key = tuple(int(k) for k in key)

    def child(self, *key: int) -> "RngStream":
        return RngStream(self.seed, self.key + tuple(key))

    def generator(self) -> np.random.Generator:
        return np.random.Generator(
            np.random.PCG64(np.random.SeedSequence(self.seed, spawn_key=self.key))
        )

    def __repr__(self):
        return f"RngStream(seed={self.seed}, key={self.key})"


def step_kinematics(state: RobotState, commanded, u_max: float) -> RobotState:
    """Apply one slot of x(k+1) = x(k) + v(k) with |v| capped at u_max."""
    if not (u_max > 0 and np.isfinite(u_max)):
        raise InvalidInputError("u_max must be positive and finite")
    v = cap_velocity(as_point(commanded), u_max)
    return RobotState(state.id, state.position + v, v, arrived=state.arrived and not v.any())


def cap_velocity(v: np.ndarray, u_max: float) -> np.ndarray:
    s = float(np.hypot(v[0], v[1]))
    if s > u_max:
        return v * (u_max / s)
    return v


def centroid(points: Iterable) -> np.ndarray:
    p = as_points(list(points) if not isinstance(points, np.ndarray) else points)
    if len(p) == 0:
        raise InvalidInputError("centroid of an empty point set")
    return p.mean(axis=0)

"""Distance/bearing measurement, polar quantization and formation-bias metrics."""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .core import InvalidInputError, InvalidSpecError, RngStream, as_point, as_points

TWO_PI = 2.0 * math.pi


@dataclass(frozen=True)
class SensorModel:
    """Gaussian distance sensor; ``sigma`` and ``sigma_theta`` are standard
    deviations."""

    sigma: float = 1.0
    n_samples: int = 10
    sigma_theta: float = 0.05

    def __post_init__(self):
        if not self.sigma > 0 or self.n_samples < 1 or self.sigma_theta < 0:
            raise InvalidSpecError("need sigma > 0, n_samples >= 1, sigma_theta >= 0")


@dataclass(frozen=True)
class QuantizerSpec:
    R: float = 300.0
    n_r: int = 128
    n_theta: int = 73
    l0: float = 120.0

    def __post_init__(self):
        if self.R <= 0 or self.n_r < 2 or self.n_theta < 3:
            raise InvalidSpecError("need R > 0, n_r >= 2, n_theta >= 3")
        if not 0 < self.l0 < self.R:
            raise InvalidSpecError("need 0 < l0 < R")

    @property
    def ring_width(self) -> float:
        return self.R / (self.n_r - 1)

    @property
    def sector_width(self) -> float:
        return TWO_PI / (self.n_theta - 1)

    @property
    def rings(self) -> int:
        return self.n_r - 1

    @property
    def sectors(self) -> int:
        return self.n_theta - 1

    def ring_mid(self, h: int) -> float:
        """Radial midpoint of ring h (1-based)."""
        return (h - 0.5) * self.ring_width

    def sector_mid(self, j: int) -> float:
        return (j - 0.5) * self.sector_width


def sample_distances(true_w: float, model: SensorModel, rng) -> np.ndarray:
    """``n_samples`` iid Normal(true_w, sigma^2) draws, not clamped."""
    if true_w < 0:
        raise InvalidInputError("true distance must be non-negative")
    g = rng.generator() if isinstance(rng, RngStream) else rng
    return true_w + model.sigma * g.standard_normal(model.n_samples)


def estimate_distance(samples) -> float:
    s = np.asarray(samples, dtype=float)
    if s.size == 0:
        raise InvalidInputError("no samples")
    return float(s.mean())


def sense_bearing(true_theta: float, model: SensorModel, rng) -> float:
    g = rng.generator() if isinstance(rng, RngStream) else rng
    return true_theta + model.sigma_theta * float(g.standard_normal())


def quantize_ring(r: float, q: QuantizerSpec) -> int:
    """Ring h in 1..n_r-1 with r_h <= r < r_{h+1}; r is clamped to [0, R]."""
    r = min(max(float(r), 0.0), q.R)
    h = int(math.floor(r / q.ring_width)) + 1
    # boundaries are r_h = w (h-1); guard the float division at exact multiples
    if h > 1 and r < q.ring_width * (h - 1):
        h -= 1
    elif h < q.rings and r >= q.ring_width * h:
        h += 1
    return min(h, q.rings)


def quantize_sector(theta: float, q: QuantizerSpec) -> int:
    """Sector j in 1..n_theta-1 with theta_j <= theta < theta_{j+1}."""
    t = float(theta) % TWO_PI
    j = int(math.floor(t / q.sector_width)) + 1
    if j > 1 and t < q.sector_width * (j - 1):
        j -= 1
    return min(j, q.sectors)


def quant_bits(n_r: int) -> float:
    if n_r < 2:
        raise InvalidInputError("n_r must be at least 2")
    return math.log2(n_r)


def position_bias(final, destination) -> float:
    d = as_point(final) - as_point(destination)
    return float(np.hypot(d[0], d[1]))


def formation_bias(finals, destinations) -> float:
    """Mean Euclidean deviation of robots from their destinations."""
    a, b = as_points(finals), as_points(destinations)
    if len(a) != len(b) or len(a) == 0:
        raise InvalidInputError("finals and destinations must be non-empty and of equal length")
    return float(np.linalg.norm(a - b, axis=1).mean())


def sample_prior(l0: float, size: int, rng: np.random.Generator) -> np.ndarray:
    """Distances of points drawn uniformly on the disk of radius l0."""
    return l0 * np.sqrt(rng.random(size))


def dequantized_estimate(w, model: SensorModel, q: QuantizerSpec, rng: np.random.Generator) -> np.ndarray:
    """Sample-mean estimate of each distance in ``w``, quantized to a ring and
    mapped back to the ring's radial midpoint.  Vectorized over ``w``."""
    w = np.asarray(w, dtype=float)
    means = w + model.sigma * rng.standard_normal((model.n_samples,) + w.shape).mean(axis=0)
    r = np.clip(means, 0.0, q.R)
    h = np.minimum(np.floor(r / q.ring_width).astype(int) + 1, q.rings)
    return (h - 0.5) * q.ring_width

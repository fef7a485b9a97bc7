"""Lower bound on the formation bias and its information-theoretic ingredients.

Information quantities are returned in bits by default.  Every function that
involves a logarithm accepts ``base`` (2 or ``math.e``); the quantization
rate ``b`` is always given in bits and converted internally.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .core import InvalidInputError


@dataclass(frozen=True)
class BoundParams:
    n: int
    sigma: float
    l0: float
    b: float

    def __post_init__(self):
        if int(self.n) != self.n or self.n < 1:
            raise InvalidInputError("n must be a positive integer")
        if not (self.sigma > 0 and self.l0 > 0 and self.b > 0):
            raise InvalidInputError("sigma, l0 and b must be positive")


def _log(x: float, base: float) -> float:
    if x <= 0:
        raise InvalidInputError(f"log of non-positive argument {x}")
    return math.log(x) / math.log(base)


def prior_pdf(r: float, l0: float) -> float:
    """Density 2r/l0^2 of the distance to a uniform point on the disk of radius l0."""
    if r < 0 or r > l0:
        return 0.0
    return 2.0 * r / (l0 * l0)


def differential_entropy(l0: float, base: float = 2) -> float:
    """Differential entropy of ``prior_pdf``: 1/2 - ln(2/l0) nats."""
    if l0 <= 0:
        raise InvalidInputError("l0 must be positive")
    return (0.5 - math.log(2.0 / l0)) / math.log(base)


def fisher_information(n: int, sigma: float) -> float:
    """Fisher information about the mean in n iid N(w, sigma^2) samples."""
    if n < 1 or sigma <= 0:
        raise InvalidInputError("need n >= 1 and sigma > 0")
    return n / (sigma * sigma)


def clarke_mutual_information(n: int, sigma: float, l0: float, base: float = 2) -> float:
    """Large-n expansion I(W; X^n) ~ (1/2) log(n / 2 pi e) + h(W) + (1/2) log J,
    with the o(1) term dropped (scalar parameter)."""
    return (
        0.5 * _log(n / (2 * math.pi * math.e), base)
        + differential_entropy(l0, base)
        + 0.5 * _log(fisher_information(n, sigma), base)
    )


def mi_upper_gaussian(p: BoundParams, base: float = 2) -> float:
    """log(n l0 / 2 sigma) + 1/2 - (1/2) log(2 pi e), evaluated literally.

    With ``base=math.e`` this equals ``clarke_mutual_information``; in bits
    the constant 1/2 is kept literally rather than rescaled to 1/(2 ln 2).
    """
    return _log(p.n * p.l0 / (2 * p.sigma), base) + 0.5 - 0.5 * _log(2 * math.pi * math.e, base)


def sdpi_alpha(p: BoundParams) -> float:
    """Floor of the likelihood ratio dP_{X|w}/dP_{X|w'} over x, w, w' in [0, l0]."""
    return math.exp(-p.n * p.l0 * p.l0 / (2 * p.sigma * p.sigma))


def sdpi_eta_upper(p: BoundParams) -> float:
    """Upper bound 1 - alpha on the backward-channel SDPI constant."""
    return -math.expm1(-p.n * p.l0 * p.l0 / (2 * p.sigma * p.sigma))


def likelihood_ratio(x, w, w_prime, n: int, sigma: float):
    """dP_{X^n|W=w} / dP_{X^n|W=w'} evaluated with all n samples equal to x.

    Each sample contributes the same factor, so the minimum over x^n is
    attained with equal samples; broadcasting over numpy arrays is supported.
    """
    x, w, w_prime = (np.asarray(v, dtype=float) for v in (x, w, w_prime))
    return np.exp(n * (w - w_prime) * (2 * x - w - w_prime) / (2 * sigma * sigma))


def _gaussian_branch(p: BoundParams, base: float) -> float:
    # the expansion is asymptotic and goes negative for tiny n*l0/sigma; a
    # mutual information never does
    return max(mi_upper_gaussian(p, base), 0.0)


def mi_upper(p: BoundParams, base: float = 2) -> float:
    """min{I(W;X^n) estimate, eta * b} in units of ``base``."""
    return min(_gaussian_branch(p, base), sdpi_eta_upper(p) * p.b * _log(2.0, base))


def bayes_lower_bound(p: BoundParams, base: float = 2) -> float:
    """(l0 / 2e) * base^(-mi_upper): lower bound on E|W - W_hat| over all estimators."""
    return p.l0 / (2 * math.e) * base ** (-mi_upper(p, base))


def bayes_lower_bound_terms(p: BoundParams, base: float = 2) -> tuple:
    """The two candidates inside the max: (Gaussian-MI branch, SDPI branch)."""
    pre = p.l0 / (2 * math.e)
    return (
        pre * base ** (-_gaussian_branch(p, base)),
        pre * 2.0 ** (-sdpi_eta_upper(p) * p.b),
    )

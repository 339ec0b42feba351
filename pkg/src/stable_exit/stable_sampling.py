"""Samplers for isotropic alpha-stable increments and their scalar building
blocks.

The d-dimensional increment uses the subordinated-Gaussian representation
sqrt(2 S) * Z with S a positive (alpha/2)-stable variable: coordinatewise
1-D stable vectors are not rotation invariant for alpha < 2, while this
construction has characteristic function exp(-t |xi|^alpha) exactly.
"""

from dataclasses import dataclass

import numpy as np

from .backend import kernels
from .rng import as_bit_generator


@dataclass(frozen=True)
class StableParams:
    """Process law: stability index alpha in (0, 2) and dimension d >= 2."""

    alpha: float
    d: int = 2

    def __post_init__(self):
        if not 0.0 < self.alpha < 2.0:
            raise ValueError("alpha must lie strictly in (0, 2)")
        if int(self.d) != self.d or not 2 <= self.d <= 64:
            raise ValueError("dimension d must be an integer in [2, 64]")


def sample_sym_stable_1d(alpha: float, rng, size=None):
    """Draw from the standard symmetric alpha-stable law, c.f. exp(-|xi|^alpha).

    Chambers-Mallows-Stuck transform of a uniform angle and an exponential
    variate.  ``size=None`` returns a scalar.
    """
    if not 0.0 < alpha < 2.0:
        raise ValueError("alpha must lie strictly in (0, 2)")
    bg = as_bit_generator(rng)
    if size is None:
        return float(kernels.sym_stable_batch(bg, alpha, 1)[0])
    return kernels.sym_stable_batch(bg, alpha, int(size))


def sample_positive_stable(rho: float, rng, size=None):
    """Draw S > 0 with Laplace transform E exp(-lam * S) = exp(-lam^rho),
    via Kanter's one-sided transform (exact, rejection-free)."""
    if not 0.0 < rho < 1.0:
        raise ValueError("rho must lie strictly in (0, 1)")
    bg = as_bit_generator(rng)
    if size is None:
        return float(kernels.positive_stable_batch(bg, rho, 1)[0])
    return kernels.positive_stable_batch(bg, rho, int(size))


def sample_isotropic_increment(params: StableParams, t: float, rng, size=None):
    """Draw displacement(s) with characteristic function exp(-t |xi|^alpha)."""
    if not t > 0.0:
        raise ValueError("time increment t must be positive")
    bg = as_bit_generator(rng)
    if size is None:
        return kernels.isotropic_increment_batch(bg, params.d, params.alpha, t, 1)[0]
    return kernels.isotropic_increment_batch(bg, params.d, params.alpha, t, int(size))

"""Exact ball-exit law of the isotropic stable process.

The exit position from a ball has an explicit density on the exterior (the
process leaves by a jump, so the harmonic measure charges the whole
complement, not the sphere).  Sampling is provided from the center only,
which is all walk-on-balls needs; evaluation supports any interior start.
"""

import math
from dataclasses import dataclass

import numpy as np
from scipy import special

from .backend import kernels
from .geometry import as_point
from .rng import as_bit_generator
from .stable_sampling import StableParams


def poisson_constant(d: int, alpha: float) -> float:
    """Normalizing constant Gamma(d/2) * pi^(-d/2 - 1) * sin(pi alpha / 2)."""
    if d < 2:
        raise ValueError("dimension d must be >= 2")
    if not 0.0 < alpha < 2.0:
        raise ValueError("alpha must lie strictly in (0, 2)")
    return math.gamma(d / 2.0) * math.pi ** (-d / 2.0 - 1.0) * math.sin(math.pi * alpha / 2.0)


def poisson_density(r: float, x, y, params: StableParams) -> float:
    """Density of the exit position from B(0, r) started at x, evaluated at y.

    C(d, alpha) * [(r^2 - |x|^2) / (|y|^2 - r^2)]^(alpha/2) * |y - x|^(-d)
    for |y| > r, and 0 for |y| <= r.
    """
    if not r > 0.0:
        raise ValueError("radius must be positive")
    x = as_point(x, params.d)
    y = as_point(y, params.d)
    nx2 = float(np.sum(x * x))
    if nx2 >= r * r:
        raise ValueError("start point must be interior: |x| < r")
    ny2 = float(np.sum(y * y))
    if ny2 <= r * r:
        return 0.0
    c = poisson_constant(params.d, params.alpha)
    ratio = (r * r - nx2) / (ny2 - r * r)
    dist = float(np.sqrt(np.sum((y - x) ** 2)))
    return c * ratio ** (params.alpha / 2.0) * dist ** (-params.d)


def exit_radius_density(rho, radius: float, d: int, alpha: float):
    """Density of |Y| for the exit position Y from the center of B(0, radius).

    Marginalizing the kernel over spheres gives
    (2 sin(pi alpha / 2) / pi) * radius^alpha * (rho^2 - radius^2)^(-alpha/2) / rho
    on rho > radius (independent of d).
    """
    rho = np.asarray(rho, dtype=np.float64)
    c = 2.0 * math.sin(math.pi * alpha / 2.0) / math.pi
    out = np.where(
        rho > radius,
        c * radius**alpha * (rho**2 - radius**2) ** (-alpha / 2.0) / rho,
        0.0,
    )
    return out if out.ndim else float(out)


def exit_radius_cdf(rho, radius: float, alpha: float):
    """Analytic CDF of |Y|: P(|Y| <= rho) = 1 - I_{(radius/rho)^2}(alpha/2, 1 - alpha/2),
    from the Beta(alpha/2, 1 - alpha/2) law of (radius/|Y|)^2."""
    rho = np.asarray(rho, dtype=np.float64)
    v = np.clip((radius / rho) ** 2, 0.0, 1.0)
    out = np.where(rho > radius, 1.0 - special.betainc(alpha / 2.0, 1.0 - alpha / 2.0, v), 0.0)
    return out if out.ndim else float(out)


def sample_ball_exit(radius: float, params: StableParams, rng, size=None):
    """Sample exit position(s) from the center of B(0, radius), returned as
    displacements from the center (callers translate).

    Exact: the radial part is radius * V^(-1/2) with V ~ Beta(alpha/2,
    1 - alpha/2) sampled by Johnk rejection, the direction is uniform.
    """
    if not radius > 0.0:
        raise ValueError("radius must be positive")
    bg = as_bit_generator(rng)
    if size is None:
        return kernels.ball_exit_batch(bg, params.d, params.alpha, radius, 1)[0]
    return kernels.ball_exit_batch(bg, params.d, params.alpha, radius, int(size))


def mean_exit_time_constant(d: int, alpha: float) -> float:
    """Unit-ball constant kappa(d, alpha) with E_x tau = kappa * (1 - |x|^2)^(alpha/2):
    Gamma(d/2) / (2^alpha * Gamma(1 + alpha/2) * Gamma((d + alpha)/2)).

    Standard closed form for the stable process; validated against an
    Euler Monte Carlo oracle in the test suite.
    """
    if d < 2:
        raise ValueError("dimension d must be >= 2")
    if not 0.0 < alpha < 2.0:
        raise ValueError("alpha must lie strictly in (0, 2)")
    return math.gamma(d / 2.0) / (
        2.0**alpha * math.gamma(1.0 + alpha / 2.0) * math.gamma((d + alpha) / 2.0)
    )


def mean_exit_time_ball(radius: float, start_offset: float, params: StableParams) -> float:
    """Expected exit time from a ball of given radius, started at distance
    start_offset from the center: kappa(d, alpha) * (radius^2 - offset^2)^(alpha/2)."""
    if not 0.0 <= start_offset < radius:
        raise ValueError("require 0 <= start_offset < radius")
    kappa = mean_exit_time_constant(params.d, params.alpha)
    return kappa * (radius * radius - start_offset * start_offset) ** (params.alpha / 2.0)


@dataclass(frozen=True)
class BallExitLaw:
    """Exit law of B(center, radius); density for any interior start,
    sampling from the center only."""

    radius: float
    center: np.ndarray
    params: StableParams

    def density(self, x, y) -> float:
        x = as_point(x, self.params.d)
        y = as_point(y, self.params.d)
        return poisson_density(self.radius, x - self.center, y - self.center, self.params)

    def sample(self, rng, size=None):
        offs = sample_ball_exit(self.radius, self.params, rng, size=size)
        return np.asarray(self.center) + offs

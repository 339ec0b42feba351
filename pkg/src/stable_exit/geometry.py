"""Parabola-shaped regions, their slices, cylinders and balls.

Points are length-d float arrays ``x = (x1, xt)`` with axial coordinate
``x[0]`` and transverse part ``x[1:]``.  The region with profile exponent
``beta`` and scale ``a`` is the open set {x1 > 0, |xt| < a * x1^beta};
membership everywhere uses the strict inequalities of that definition, and
walkers treat non-interior points as exited.

All operations are pure functions; the exact distance-to-complement solver
lives in the kernel backends (pure and compiled twins).
"""

import math
from dataclasses import dataclass

import numpy as np

from .backend import kernels
from ._pykernels import DOMAIN_BALL, DOMAIN_CYLINDER, DOMAIN_PARABOLA, DOMAIN_SLICE


def as_point(x, d=None):
    """Validate and return x as a 1-D float64 array of finite coordinates."""
    p = np.asarray(x, dtype=np.float64)
    if p.ndim != 1 or p.size < 2:
        raise ValueError("a point is a 1-D array of length d >= 2")
    if d is not None and p.size != d:
        raise ValueError(f"point has dimension {p.size}, expected {d}")
    if not np.all(np.isfinite(p)):
        raise ValueError("point coordinates must be finite")
    return p


def transverse_norm(x):
    return float(np.sqrt(np.sum(np.asarray(x, dtype=np.float64)[1:] ** 2)))


@dataclass(frozen=True)
class ParabolaRegion:
    """Open region {x1 > 0, |xt| < a * x1^beta} in R^d."""

    beta: float
    a: float = 1.0
    d: int = 2

    def __post_init__(self):
        if not 0.0 < self.beta < 1.0:
            raise ValueError("beta must lie in (0, 1)")
        if not self.a > 0.0:
            raise ValueError("profile scale a must be positive")
        if int(self.d) != self.d or self.d < 2:
            raise ValueError("dimension d must be an integer >= 2")

    def kernel_encoding(self):
        return DOMAIN_PARABOLA, np.array([self.beta, self.a])

    def contains(self, x) -> bool:
        p = as_point(x, self.d)
        x1 = p[0]
        return x1 > 0.0 and transverse_norm(p) < self.a * x1**self.beta

    def contains_batch(self, pts) -> np.ndarray:
        pts = np.asarray(pts, dtype=np.float64)
        x1 = pts[:, 0]
        rt = np.sqrt(np.sum(pts[:, 1:] ** 2, axis=1))
        with np.errstate(invalid="ignore"):
            return (x1 > 0.0) & (rt < self.a * np.where(x1 > 0.0, x1, 0.0) ** self.beta)

    def dist_to_complement(self, x) -> float:
        p = as_point(x, self.d)
        if not self.contains(p):
            raise ValueError("point is not interior to the region")
        kind, params = self.kernel_encoding()
        return kernels.domain_distance(kind, params, p)

    def to_json(self):
        return {"beta": self.beta, "a": self.a, "d": self.d}

    @classmethod
    def from_json(cls, obj):
        return cls(beta=float(obj["beta"]), a=float(obj.get("a", 1.0)), d=int(obj["d"]))


@dataclass(frozen=True)
class RegionSlice:
    """Axial slice region ∩ {u <= x1 < v}; v may be math.inf."""

    region: ParabolaRegion
    u: float
    v: float

    def __post_init__(self):
        if not (0.0 <= self.u < self.v):
            raise ValueError("slice requires 0 <= u < v")

    @property
    def d(self):
        return self.region.d

    def kernel_encoding(self):
        r = self.region
        return DOMAIN_SLICE, np.array([r.beta, r.a, self.u, self.v])

    def contains(self, x) -> bool:
        p = as_point(x, self.d)
        return self.u <= p[0] < self.v and self.region.contains(p)

    def contains_batch(self, pts) -> np.ndarray:
        pts = np.asarray(pts, dtype=np.float64)
        x1 = pts[:, 0]
        return (x1 >= self.u) & (x1 < self.v) & self.region.contains_batch(pts)

    def is_interior(self, x) -> bool:
        p = as_point(x, self.d)
        return self.u < p[0] < self.v and self.region.contains(p)

    def dist_to_complement(self, x) -> float:
        p = as_point(x, self.d)
        if not self.is_interior(p):
            raise ValueError("point is not interior to the slice")
        kind, params = self.kernel_encoding()
        return kernels.domain_distance(kind, params, p)


@dataclass(frozen=True)
class Cylinder:
    """Half-infinite cylinder {x1 < s, |xt| < s^beta} dominating the slice
    region with axial cut s (unit profile scale)."""

    s: float
    beta: float
    d: int = 2

    def __post_init__(self):
        if not self.s > 0.0:
            raise ValueError("axial cut s must be positive")
        if not 0.0 < self.beta < 1.0:
            raise ValueError("beta must lie in (0, 1)")
        if int(self.d) != self.d or self.d < 2:
            raise ValueError("dimension d must be an integer >= 2")

    @property
    def transverse_radius(self) -> float:
        return self.s**self.beta

    def kernel_encoding(self):
        return DOMAIN_CYLINDER, np.array([self.s, self.transverse_radius])

    def contains(self, x) -> bool:
        p = as_point(x, self.d)
        return p[0] < self.s and transverse_norm(p) < self.transverse_radius

    def contains_batch(self, pts) -> np.ndarray:
        pts = np.asarray(pts, dtype=np.float64)
        rt = np.sqrt(np.sum(pts[:, 1:] ** 2, axis=1))
        return (pts[:, 0] < self.s) & (rt < self.transverse_radius)

    def dist_to_complement(self, x) -> float:
        p = as_point(x, self.d)
        if not self.contains(p):
            raise ValueError("point is not interior to the cylinder")
        kind, params = self.kernel_encoding()
        return kernels.domain_distance(kind, params, p)


@dataclass(frozen=True)
class InfiniteCylinder:
    """Transverse tube {|xt| < radius} with no axial cut (used for survival
    decay rates; the transverse motion alone drives the exit)."""

    radius: float
    d: int = 2

    def __post_init__(self):
        if not self.radius > 0.0:
            raise ValueError("radius must be positive")
        if int(self.d) != self.d or self.d < 2:
            raise ValueError("dimension d must be an integer >= 2")

    def kernel_encoding(self):
        return DOMAIN_CYLINDER, np.array([math.inf, self.radius])

    def contains(self, x) -> bool:
        p = as_point(x, self.d)
        return transverse_norm(p) < self.radius

    def contains_batch(self, pts) -> np.ndarray:
        pts = np.asarray(pts, dtype=np.float64)
        return np.sqrt(np.sum(pts[:, 1:] ** 2, axis=1)) < self.radius

    def dist_to_complement(self, x) -> float:
        p = as_point(x, self.d)
        if not self.contains(p):
            raise ValueError("point is not interior to the cylinder")
        kind, params = self.kernel_encoding()
        return kernels.domain_distance(kind, params, p)


@dataclass(frozen=True)
class Ball:
    """Open ball of given radius centered at the origin."""

    radius: float
    d: int = 2

    def __post_init__(self):
        if not self.radius > 0.0:
            raise ValueError("radius must be positive")
        if int(self.d) != self.d or self.d < 2:
            raise ValueError("dimension d must be an integer >= 2")

    def kernel_encoding(self):
        return DOMAIN_BALL, np.array([self.radius])

    def contains(self, x) -> bool:
        p = as_point(x, self.d)
        return float(np.sqrt(np.sum(p * p))) < self.radius

    def contains_batch(self, pts) -> np.ndarray:
        pts = np.asarray(pts, dtype=np.float64)
        return np.sqrt(np.sum(pts**2, axis=1)) < self.radius

    def dist_to_complement(self, x) -> float:
        p = as_point(x, self.d)
        if not self.contains(p):
            raise ValueError("point is not interior to the ball")
        kind, params = self.kernel_encoding()
        return kernels.domain_distance(kind, params, p)


# ---------------------------------------------------------------------------
# free functions mirroring the domain operations


def contains(region: ParabolaRegion, x) -> bool:
    """True iff x1 > 0 and |xt| < a * x1^beta (strict)."""
    return region.contains(x)


def dist_to_complement(region: ParabolaRegion, x) -> float:
    """Euclidean distance from an interior point to the complement."""
    return region.dist_to_complement(x)


def in_safe_zone(region: ParabolaRegion, x) -> bool:
    """True iff x1 > 1 and |xt| < x1^beta / 2 (requires unit profile scale)."""
    if region.a != 1.0:
        raise ValueError("the safe zone is defined for unit profile scale (a = 1)")
    p = as_point(x, region.d)
    x1 = p[0]
    return x1 > 1.0 and transverse_norm(p) < 0.5 * x1**region.beta


def safe_ball_radius(x, beta: float) -> float:
    """Radius |x|^beta / 5 of the inscribed ball guaranteed around safe-zone
    points; rejects points outside the safe zone."""
    p = as_point(x)
    region = ParabolaRegion(beta=beta, a=1.0, d=p.size)
    if not in_safe_zone(region, p):
        raise ValueError("point is outside the safe zone")
    return float(np.sqrt(np.sum(p * p))) ** beta / 5.0


def slice_contains(slc: RegionSlice, x) -> bool:
    """True iff the region contains x and u <= x1 < v."""
    return slc.contains(x)


def cylinder_contains(cyl: Cylinder, x) -> bool:
    """True iff x1 < s and |xt| < s^beta (strict)."""
    return cyl.contains(x)

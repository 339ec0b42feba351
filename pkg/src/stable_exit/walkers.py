"""Exit-position and exit-time samplers for region slices, cylinders and balls.

walk_on_balls iterates exact ball-exit jumps from inscribed balls; by the
strong Markov property every jump lands on an embedded point of the true
trajectory, so the exit position is an exact draw from the domain's harmonic
measure for any ball-shrink factor gamma in (0, 1].  Exit *times* come from
the Euler scheme, which is biased at scale h and therefore always paired
with step-halving diagnostics.
"""

import enum
import math
from dataclasses import dataclass

import numpy as np
from scipy import stats

from .backend import kernels
from .ball_exit import mean_exit_time_constant
from .geometry import as_point
from .rng import as_bit_generator
from .stable_sampling import StableParams


class WalkStatus(enum.Enum):
    EXITED = "exited"
    MAX_STEPS_EXCEEDED = "max_steps_exceeded"


@dataclass(frozen=True)
class WalkResult:
    """One walk-on-balls run: a single draw from the harmonic measure."""

    exit_point: np.ndarray
    steps: int
    mean_time_accumulator: float
    status: WalkStatus


@dataclass(frozen=True)
class ExitTimeSample:
    time: float
    exit_point: np.ndarray
    censored: bool


@dataclass(frozen=True)
class SurvivalCurve:
    """Censored exit-time survival estimates with exact binomial CIs."""

    times: np.ndarray
    survival: np.ndarray
    ci_lo: np.ndarray
    ci_hi: np.ndarray
    n: int
    censored_fraction: float


def clopper_pearson(k: int, n: int, level: float = 0.99):
    """Exact binomial confidence interval for k successes out of n."""
    if not 0 <= k <= n or n <= 0:
        raise ValueError("require 0 <= k <= n with n > 0")
    tail = 0.5 * (1.0 - level)
    lo = 0.0 if k == 0 else float(stats.beta.ppf(tail, k, n - k + 1))
    hi = 1.0 if k == n else float(stats.beta.ppf(1.0 - tail, k + 1, n - k))
    return lo, hi


def _interior(domain, x) -> bool:
    check = getattr(domain, "is_interior", None)
    return check(x) if check is not None else domain.contains(x)


def _start_point(domain, x0):
    d = domain.d if hasattr(domain, "d") else len(x0)
    p = as_point(x0, d)
    if not _interior(domain, p):
        raise ValueError("start point must be interior to the domain")
    return p


def wob_sample(domain, x0, params: StableParams, n: int, rng, gamma: float = 1.0,
               max_steps: int = 10**5):
    """Run n independent walk-on-balls trajectories.

    Returns (exit_points, steps, mean_time, status) arrays; status 0 means
    exited, 1 means the step budget ran out (the exit point is then the last
    interior position and must not be counted as a harmonic-measure draw).
    """
    if not 0.0 < gamma <= 1.0:
        raise ValueError("gamma must lie in (0, 1]")
    if max_steps < 1:
        raise ValueError("max_steps must be >= 1")
    p = _start_point(domain, x0)
    kind, dom_params = domain.kernel_encoding()
    kappa = mean_exit_time_constant(params.d, params.alpha)
    bg = as_bit_generator(rng)
    return kernels.wob_batch(bg, kind, dom_params, p, params.alpha, gamma,
                             int(max_steps), int(n), kappa)


def walk_on_balls(domain, x0, params: StableParams, rng, gamma: float = 1.0,
                  max_steps: int = 10**5) -> WalkResult:
    """Single walk-on-balls draw from the harmonic measure of the domain."""
    pts, steps, mt, status = wob_sample(domain, x0, params, 1, rng, gamma=gamma,
                                        max_steps=max_steps)
    st = WalkStatus.EXITED if status[0] == 0 else WalkStatus.MAX_STEPS_EXCEEDED
    return WalkResult(exit_point=pts[0], steps=int(steps[0]),
                      mean_time_accumulator=float(mt[0]), status=st)


def euler_sample(domain, x0, params: StableParams, h: float, t_max: float,
                 n: int, rng):
    """Run n Euler walks; returns (times, censored, exit_points)."""
    if not h > 0.0:
        raise ValueError("step size h must be positive")
    if not t_max > h:
        raise ValueError("t_max must exceed the step size h")
    p = _start_point(domain, x0)
    kind, dom_params = domain.kernel_encoding()
    bg = as_bit_generator(rng)
    return kernels.euler_batch(bg, kind, dom_params, p, params.alpha, h, t_max, int(n))


def euler_sample_coupled(domain, x0, params: StableParams, h: float, t_max: float,
                         n: int, rng):
    """Euler walks at step h together with the coupled 2h observations of the
    same trajectories; returns (times_h, cens_h, times_2h, cens_2h, exit_points).

    The 2h chain subsamples the h chain at even grid points (two h-increments
    sum to one 2h-increment in law), so the difference between the two
    estimates isolates the discretization effect with tiny variance.
    """
    if not h > 0.0:
        raise ValueError("step size h must be positive")
    if not t_max > h:
        raise ValueError("t_max must exceed the step size h")
    p = _start_point(domain, x0)
    kind, dom_params = domain.kernel_encoding()
    bg = as_bit_generator(rng)
    return kernels.euler_batch_coupled(bg, kind, dom_params, p, params.alpha, h,
                                       t_max, int(n))


def euler_exit_time(domain, x0, params: StableParams, h: float, t_max: float,
                    rng) -> ExitTimeSample:
    """One Euler-scheme exit-time sample (censored at t_max)."""
    times, censored, pts = euler_sample(domain, x0, params, h, t_max, 1, rng)
    return ExitTimeSample(time=float(times[0]), exit_point=pts[0],
                          censored=bool(censored[0]))


def survival_from_times(times, censored, time_grid, level: float = 0.99) -> SurvivalCurve:
    """Assemble P(tau > t) estimates with Clopper-Pearson CIs from samples.

    Censored walks (time == t_max, still inside) count as alive at every grid
    point; the grid must not extend past t_max.
    """
    times = np.asarray(times, dtype=np.float64)
    censored = np.asarray(censored, dtype=bool)
    grid = np.asarray(time_grid, dtype=np.float64)
    if grid.ndim != 1 or grid.size == 0 or np.any(np.diff(grid) <= 0.0):
        raise ValueError("time grid must be strictly ascending and nonempty")
    n = times.size
    if censored.any():
        t_cens = times[censored].min()
        if grid[-1] > t_cens:
            raise ValueError("time grid extends past the censoring horizon")
    surv = np.empty(grid.size)
    lo = np.empty(grid.size)
    hi = np.empty(grid.size)
    for i, t in enumerate(grid):
        alive = int(np.count_nonzero((times > t) | censored))
        surv[i] = alive / n
        lo[i], hi[i] = clopper_pearson(alive, n, level=level)
    return SurvivalCurve(times=grid, survival=surv, ci_lo=lo, ci_hi=hi, n=n,
                         censored_fraction=float(censored.mean()))


def survival_curve(domain, x0, params: StableParams, h: float, time_grid,
                   n: int, rng, level: float = 0.99) -> SurvivalCurve:
    """Survival estimates P(tau > t) on time_grid from n Euler walks censored
    at t_max = max(time_grid)."""
    grid = np.asarray(time_grid, dtype=np.float64)
    if grid.ndim != 1 or grid.size == 0 or np.any(np.diff(grid) <= 0.0):
        raise ValueError("time grid must be strictly ascending and nonempty")
    if not grid[0] > 0.0:
        raise ValueError("time grid must start after 0")
    t_max = float(grid[-1])
    times, censored, _ = euler_sample(domain, x0, params, h, t_max, n, rng)
    return survival_from_times(times, censored, grid, level=level)

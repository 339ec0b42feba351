"""Estimators and bound comparators for the exit-time study.

Turns raw Monte Carlo output into the quantities of interest: the critical
integrability exponent of the exit time, harmonic-measure decay exponents,
tail indices and cylinder survival rates.  The unspecified constants in the
theoretical bounds are existential, so every bound check here is an exponent
fit or a bounded-ratio comparison, never an absolute-constant assertion; all
point estimates are returned with CIs or standard errors.
"""

import math
from dataclasses import dataclass

import numpy as np
from scipy import integrate

from .geometry import ParabolaRegion, RegionSlice
from .stable_sampling import StableParams
from .walkers import SurvivalCurve, clopper_pearson, wob_sample

# two-sided 99% normal quantile, used to turn CP intervals into log-scale weights
Z99 = 2.5758293035489004


def critical_exponent(d: int, alpha: float, beta: float) -> float:
    """Critical moment order p0 = ((d-1)(1-beta) + alpha) / (alpha * beta):
    E tau^p is finite iff p < p0."""
    if int(d) != d or d < 2:
        raise ValueError("dimension d must be an integer >= 2")
    if not 0.0 < alpha < 2.0:
        raise ValueError("alpha must lie strictly in (0, 2)")
    if not 0.0 < beta < 1.0:
        raise ValueError("beta must lie strictly in (0, 1)")
    return ((d - 1) * (1.0 - beta) + alpha) / (alpha * beta)


def lemma2_bound(s: float, u: float, v: float, alpha: float, beta: float, d: int) -> float:
    """Slice-escape bound shape s^(alpha beta) * int_u^v t^(-alpha beta p0 - 1) dt,
    without the unspecified constant.  Requires s >= 1 and either
    u >= s + s^beta, or u == s with v >= s + s^beta; v may be inf."""
    p0 = critical_exponent(d, alpha, beta)
    if not s >= 1.0:
        raise ValueError("require s >= 1")
    if not (s <= u <= v):
        raise ValueError("require s <= u <= v")
    gate = s + s**beta
    if not (u >= gate or (u == s and v >= gate)):
        raise ValueError("require u >= s + s^beta, or u == s and v >= s + s^beta")
    q = alpha * beta * p0
    tail = 0.0 if math.isinf(v) else v**-q
    return s ** (alpha * beta) * (u**-q - tail) / q


@dataclass(frozen=True)
class ExponentFit:
    """Weighted log-log slope with its standard error and the value the
    theory predicts for it."""

    slope: float
    stderr: float
    window: tuple
    predicted: float
    n_points: int
    intercept: float
    r_squared: float


@dataclass(frozen=True)
class CylinderDecayFit:
    """Exponential survival decay rate fitted on a time window."""

    lambda_hat: float
    stderr: float
    window: tuple
    r_squared: float
    n_points: int


@dataclass(frozen=True)
class EscapeEstimate:
    """Fraction of slice exits that land in the region beyond the cut."""

    estimate: float
    ci_lo: float
    ci_hi: float
    hits: int
    n: int
    max_steps_exceeded: int


@dataclass(frozen=True)
class TailIndexFit:
    hill: ExponentFit
    survival: ExponentFit
    k: int
    n_uncensored: int
    censored_fraction: float


@dataclass(frozen=True)
class MomentEstimate:
    """Empirical p-th moment with a running-estimate stability diagnostic."""

    value: float
    p: float
    n_uncensored: int
    censored_fraction: float
    rel_change_last_doubling: float
    doubling_estimates: tuple

    @property
    def stable(self) -> bool:
        return self.rel_change_last_doubling < 0.05


def _wls_line(x, y, sigma):
    """Weighted least squares of y on x; returns slope, intercept, slope
    stderr (from the weight model) and R^2."""
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    w = 1.0 / np.asarray(sigma, dtype=np.float64) ** 2
    sw = w.sum()
    xbar = (w * x).sum() / sw
    ybar = (w * y).sum() / sw
    sxx = (w * (x - xbar) ** 2).sum()
    slope = (w * (x - xbar) * (y - ybar)).sum() / sxx
    intercept = ybar - slope * xbar
    stderr = math.sqrt(1.0 / sxx)
    resid = y - intercept - slope * x
    ss_res = (w * resid**2).sum()
    ss_tot = (w * (y - ybar) ** 2).sum()
    r2 = 1.0 - ss_res / ss_tot if ss_tot > 0.0 else 1.0
    return slope, intercept, stderr, r2


def fit_log_log_exponent(points, predicted: float) -> ExponentFit:
    """Weighted LS of log(estimate) on log(scale).

    ``points`` is a sequence of (scale, estimate, ci_lo, ci_hi); weights come
    from the CI widths via the delta method sd(log p) ~ (log hi - log lo) / (2 z).
    """
    pts = [tuple(map(float, p)) for p in points]
    if len(pts) < 3:
        raise ValueError("need at least 3 points to fit an exponent")
    for s, est, lo, hi in pts:
        if est <= 0.0 or lo <= 0.0 or hi <= 0.0:
            raise ValueError("estimates and CI bounds must be positive (log fit)")
    x = np.log([p[0] for p in pts])
    y = np.log([p[1] for p in pts])
    sigma = np.array([(math.log(p[3]) - math.log(p[2])) / (2.0 * Z99) for p in pts])
    sigma = np.maximum(sigma, 1e-12)
    slope, intercept, stderr, r2 = _wls_line(x, y, sigma)
    window = (min(p[0] for p in pts), max(p[0] for p in pts))
    return ExponentFit(slope=slope, stderr=stderr, window=window,
                       predicted=predicted, n_points=len(pts),
                       intercept=intercept, r_squared=r2)


def harmonic_escape_probability(region: ParabolaRegion, s: float, x0,
                                params: StableParams, n: int, rng,
                                gamma: float = 1.0, max_steps: int = 10**5) -> EscapeEstimate:
    """Estimate P_x{exit position of the slice (0, s) lands back in the region},
    i.e. the mass escaping past the cut, with a 99% Clopper-Pearson CI.

    Runs n walk-on-balls draws on the slice; walks that hit the step budget
    are excluded from both numerator and denominator and reported separately.
    """
    x0 = np.asarray(x0, dtype=np.float64)
    if not x0[0] <= s / 2.0:
        raise ValueError("start must satisfy x1 <= s/2 (bound hypothesis)")
    slc = RegionSlice(region, 0.0, float(s))
    pts, _, _, status = wob_sample(slc, x0, params, n, rng, gamma=gamma,
                                   max_steps=max_steps)
    ok = status == 0
    n_eff = int(ok.sum())
    lost = int(n - n_eff)
    if n_eff == 0:
        raise RuntimeError("all walks exceeded the step budget")
    hits = int(region.contains_batch(pts[ok]).sum())
    lo, hi = clopper_pearson(hits, n_eff, level=0.99)
    return EscapeEstimate(estimate=hits / n_eff, ci_lo=lo, ci_hi=hi, hits=hits,
                          n=n_eff, max_steps_exceeded=lost)


def hill_tail_index(samples, k: int):
    """Hill estimator of the tail index q (P(X > x) ~ x^-q) from the top-k
    order statistics; returns (q_hat, stderr)."""
    x = np.sort(np.asarray(samples, dtype=np.float64))
    n = x.size
    if not 1 <= k < n:
        raise ValueError("require 1 <= k < number of samples")
    threshold = x[n - k - 1]
    if threshold <= 0.0:
        raise ValueError("threshold order statistic must be positive")
    gamma = np.mean(np.log(x[n - k:]) - math.log(threshold))
    if gamma <= 0.0:
        raise ValueError("degenerate Hill estimate (ties at the threshold)")
    q = 1.0 / gamma
    return q, q / math.sqrt(k)


def hill_sweep(samples, ks):
    """Hill estimates across a k-sweep (bias-variance diagnostic)."""
    return [(int(k),) + hill_tail_index(samples, int(k)) for k in ks]


def default_hill_k(n_uncensored: int) -> int:
    """ceil(n^0.6) capped at n/10 (and at n-1)."""
    k = int(math.ceil(n_uncensored**0.6))
    return max(1, min(k, n_uncensored // 10, n_uncensored - 1))


def survival_regression(times, censored, window, n_points: int = 25,
                        predicted: float = 0.0, bootstrap: int = 0,
                        rng=None) -> ExponentFit:
    """Log-log WLS of the empirical survival on a time window.

    The slope estimates -q for a tail P(tau > t) ~ t^-q.  If ``bootstrap``
    is positive the stderr is replaced by a resampling estimate, which
    accounts for the strong correlation between grid points.
    """
    times = np.asarray(times, dtype=np.float64)
    censored = (np.zeros(times.shape, dtype=bool) if censored is None
                else np.asarray(censored, dtype=bool))
    t_lo, t_hi = float(window[0]), float(window[1])
    if not 0.0 < t_lo < t_hi:
        raise ValueError("window must satisfy 0 < t_lo < t_hi")
    grid = np.geomspace(t_lo, t_hi, n_points)
    n = times.size

    def _points(ts, cs):
        out = []
        for t in grid:
            alive = int(np.count_nonzero((ts > t) | cs))
            if alive == 0:
                raise ValueError("zero survival inside the fit window")
            lo, hi = clopper_pearson(alive, n, level=0.99)
            out.append((t, alive / n, max(lo, 1e-300), hi))
        return out

    fit = fit_log_log_exponent(_points(times, censored), predicted)
    if bootstrap > 0:
        gen = np.random.Generator(rng.bit_generator()) if hasattr(rng, "bit_generator") \
            else np.random.default_rng(rng)
        slopes = []
        for _ in range(bootstrap):
            idx = gen.integers(0, n, size=n)
            try:
                slopes.append(fit_log_log_exponent(_points(times[idx], censored[idx]),
                                                   predicted).slope)
            except ValueError:
                continue
        if len(slopes) >= 8:
            fit = ExponentFit(slope=fit.slope, stderr=float(np.std(slopes, ddof=1)),
                              window=fit.window, predicted=fit.predicted,
                              n_points=fit.n_points, intercept=fit.intercept,
                              r_squared=fit.r_squared)
    return fit


def tail_window(times, censored, min_exceedances: int = 200,
                survival_lo: float = 0.05):
    """Default survival-regression window: starts where the survival drops to
    ``survival_lo`` and ends while at least ``min_exceedances`` uncensored
    samples remain, controlling the variance at the window edge."""
    times = np.asarray(times, dtype=np.float64)
    censored = (np.zeros(times.shape, dtype=bool) if censored is None
                else np.asarray(censored, dtype=bool))
    unc = np.sort(times[~censored])
    if unc.size < 4 * min_exceedances:
        raise ValueError("too few uncensored samples for a tail window")
    n = times.size
    t_lo = float(np.quantile(unc, 1.0 - survival_lo * n / unc.size))
    t_hi = float(unc[unc.size - min_exceedances])
    if not t_lo < t_hi:
        raise ValueError("degenerate tail window; lower min_exceedances")
    return t_lo, t_hi


def fit_tail_index(times, censored=None, k=None, window=None, predicted: float = 0.0,
                   bootstrap: int = 0, rng=None) -> TailIndexFit:
    """Tail-index estimates for exit-time samples: Hill on the top-k order
    statistics plus a log-log survival regression, both with stderr.

    Censored samples must all exceed the Hill threshold; they contribute
    "alive" mass to the survival regression but are excluded from Hill.
    """
    times = np.asarray(times, dtype=np.float64)
    censored = (np.zeros(times.shape, dtype=bool) if censored is None
                else np.asarray(censored, dtype=bool))
    unc = times[~censored]
    n_unc = unc.size
    if k is None:
        k = default_hill_k(n_unc)
    if not 1 <= k < n_unc:
        raise ValueError("require 1 <= k < number of uncensored samples")
    threshold = np.sort(unc)[n_unc - k - 1]
    if censored.any() and times[censored].min() <= threshold:
        raise ValueError("censoring invalidates the top-k order statistics")
    if censored.sum() > 0.1 * k:
        raise ValueError("too many censored samples for a top-k tail fit")
    q, q_se = hill_tail_index(unc, k)
    hill = ExponentFit(slope=q, stderr=q_se, window=(float(threshold), float(unc.max())),
                       predicted=predicted, n_points=k, intercept=math.nan,
                       r_squared=math.nan)
    if window is None:
        window = tail_window(times, censored)
    surv = survival_regression(times, censored, window, predicted=-predicted,
                               bootstrap=bootstrap, rng=rng)
    return TailIndexFit(hill=hill, survival=surv, k=int(k), n_uncensored=int(n_unc),
                        censored_fraction=float(censored.mean()))


def fit_cylinder_decay(curve: SurvivalCurve, window) -> CylinderDecayFit:
    """Least-squares slope of log survival vs t on the window, negated.

    For the dominating cylinder this estimates the exponential survival rate
    (transverse-radius^-alpha times the principal eigenvalue-type constant);
    a pre-asymptotic window is flagged by R^2 < 0.99, not an error.
    """
    t_lo, t_hi = float(window[0]), float(window[1])
    mask = (curve.times >= t_lo) & (curve.times <= t_hi)
    if mask.sum() < 3:
        raise ValueError("window must contain at least 3 grid points")
    if np.any(curve.survival[mask] <= 0.0):
        raise ValueError("window contains zero-survival points")
    t = curve.times[mask]
    y = np.log(curve.survival[mask])
    sigma = np.ones_like(t)
    slope, _, _, r2 = _wls_line(t, y, sigma)
    resid = y - (y.mean() + slope * (t - t.mean()))
    dof = max(mask.sum() - 2, 1)
    se = math.sqrt(float(resid @ resid) / dof / float(((t - t.mean()) ** 2).sum()))
    lam = -slope
    if lam <= 0.0:
        raise ValueError("fitted decay rate is not positive")
    return CylinderDecayFit(lambda_hat=lam, stderr=se, window=(t_lo, t_hi),
                            r_squared=r2, n_points=int(mask.sum()))


def moment_estimate(samples, censored_fraction: float, p: float) -> MomentEstimate:
    """Empirical mean of tau^p over uncensored samples, with the relative
    change of the running estimate over the last doubling of sample count.

    Estimates at p near or above the critical exponent are unreliable by
    construction; the doubling diagnostic makes that visible (censored
    samples are excluded and their fraction reported alongside).
    """
    if p < 0.0:
        raise ValueError("moment order p must be nonnegative")
    x = np.asarray(samples, dtype=np.float64)
    if x.size == 0:
        raise ValueError("no uncensored samples")
    xp = x**p
    checkpoints = []
    m = x.size
    while m >= 1:
        checkpoints.append(m)
        if m == 1:
            break
        m //= 2
    checkpoints = checkpoints[::-1]
    running = np.cumsum(xp)
    doubling = tuple(float(running[m - 1] / m) for m in checkpoints)
    value = doubling[-1]
    if len(doubling) >= 2 and value != 0.0:
        rel = abs(value - doubling[-2]) / abs(value)
    else:
        rel = 0.0
    return MomentEstimate(value=value, p=p, n_uncensored=int(x.size),
                          censored_fraction=float(censored_fraction),
                          rel_change_last_doubling=float(rel),
                          doubling_estimates=doubling)


def cylinder_jump_bound(s: float, u: float, v: float, x0, alpha: float,
                        beta: float, d: int) -> float:
    """Numerical integral of the cylinder single-jump bound over the slice
    (u, v) of the region, for a start x0 = (x1, 0) inside the cylinder:

        int s^(alpha beta) / |z - x|^(d + alpha) * max(s^(alpha beta / 2) /
        (z1 - s)^(alpha / 2), 1) dz,   z over the slice,

    returned without the unspecified constant.  Used as a bound comparator:
    cylinder escape estimates may only be compared through a single fitted
    constant across slices.
    """
    if d not in (2, 3):
        raise ValueError("bound comparator implemented for d in {2, 3}")
    x1 = float(np.asarray(x0, dtype=np.float64)[0])
    sab = s ** (alpha * beta)
    shalf = s ** (alpha * beta / 2.0)

    def kernel(z1, w):
        # w = |z~| transverse radius
        r2 = (z1 - x1) ** 2 + w * w
        val = sab * r2 ** (-(d + alpha) / 2.0)
        spike = shalf / (z1 - s) ** (alpha / 2.0)
        return val * (spike if spike > 1.0 else 1.0)

    if d == 2:
        # z~ scalar: integrate 2 * int_0^{z1^beta} dw
        def inner(z1):
            val, _ = integrate.quad(lambda w: kernel(z1, w), 0.0, z1**beta, limit=200)
            return 2.0 * val
    else:
        def inner(z1):
            val, _ = integrate.quad(lambda w: 2.0 * math.pi * w * kernel(z1, w),
                                    0.0, z1**beta, limit=200)
            return val

    # split at the end of the near-cut spike so quad only sees the
    # (z1 - s)^(-alpha/2) singularity as an endpoint
    hi = min(v, 16.0 * max(s, u))
    cuts = sorted({u, min(max(s + s**beta, u), hi), hi})
    total = 0.0
    for a_, b_ in zip(cuts[:-1], cuts[1:]):
        if b_ > a_:
            val, _ = integrate.quad(inner, a_, b_, limit=400)
            total += val
    if v > hi:
        tail, _ = integrate.quad(inner, hi, v, limit=200)
        total += tail
    return total

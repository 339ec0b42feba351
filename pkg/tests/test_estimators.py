import math

import numpy as np
import pytest

from stable_exit.estimators import (
    critical_exponent,
    cylinder_jump_bound,
    default_hill_k,
    fit_cylinder_decay,
    fit_log_log_exponent,
    fit_tail_index,
    harmonic_escape_probability,
    hill_tail_index,
    lemma2_bound,
    moment_estimate,
    survival_regression,
)
from stable_exit.geometry import Cylinder, InfiniteCylinder, ParabolaRegion, RegionSlice
from stable_exit.rng import RngStream
from stable_exit.stable_sampling import StableParams
from stable_exit.walkers import SurvivalCurve, clopper_pearson, euler_sample, \
    survival_from_times, wob_sample

from conftest import requires_compiled

REGION = ParabolaRegion(beta=0.5, a=1.0, d=2)
PARAMS = StableParams(alpha=1.0, d=2)


def test_critical_exponent_values():
    assert critical_exponent(2, 1.0, 0.5) == 3.0
    assert critical_exponent(3, 1.5, 0.5) == 10.0 / 3.0
    val = critical_exponent(2, 1.0, 0.99)
    assert val == pytest.approx(1.0202, abs=1e-4)
    assert val > 1.0  # approaches 1 from above as beta -> 1


def test_critical_exponent_validation():
    for args in ((1, 1.0, 0.5), (2, 0.0, 0.5), (2, 2.0, 0.5), (2, 1.0, 0.0),
                 (2, 1.0, 1.0)):
        with pytest.raises(ValueError):
            critical_exponent(*args)


def test_lemma2_bound_reduces_to_far_tail_form():
    # u = s, v = inf: s^(ab) * s^(-ab p0) / (ab p0) = s^(-ab (p0-1)) / (ab p0)
    for s in (1.0, 4.0, 9.0):
        got = lemma2_bound(s, s, math.inf, 1.0, 0.5, 2)
        ab = 0.5
        p0 = 3.0
        assert got == pytest.approx(s ** (-ab * (p0 - 1.0)) / (ab * p0), rel=1e-12)


def test_lemma2_bound_degenerate_and_scaling():
    s = 4.0
    u = s + s**0.5
    assert lemma2_bound(s, u, u, 1.0, 0.5, 2) == 0.0
    # doubling s at fixed (u, v) multiplies by 2^(alpha beta)
    a = lemma2_bound(16.0, 64.0, 256.0, 1.0, 0.5, 2)
    b = lemma2_bound(32.0, 64.0, 256.0, 1.0, 0.5, 2)
    assert b / a == pytest.approx(2.0 ** (1.0 * 0.5), rel=1e-12)


def test_lemma2_bound_hypothesis_enforced():
    with pytest.raises(ValueError):
        lemma2_bound(0.5, 2.0, 3.0, 1.0, 0.5, 2)  # s < 1
    with pytest.raises(ValueError):
        lemma2_bound(4.0, 5.0, math.inf, 1.0, 0.5, 2)  # u between s and s + s^b
    with pytest.raises(ValueError):
        lemma2_bound(4.0, 4.0, 5.0, 1.0, 0.5, 2)  # u = s but v below the gate


def test_fit_log_log_exact_power_law():
    pts = [(s, 3.7 * s**-1.5, 3.5 * s**-1.5, 3.9 * s**-1.5) for s in (8, 16, 32, 64)]
    fit = fit_log_log_exponent(pts, predicted=-1.5)
    assert fit.slope == pytest.approx(-1.5, abs=1e-12)
    assert fit.n_points == 4
    assert fit.window == (8, 64)
    assert fit.r_squared == pytest.approx(1.0, abs=1e-9)


def test_fit_log_log_validation():
    pts = [(8, 1e-2, 9e-3, 1.1e-2), (16, 5e-3, 4e-3, 6e-3)]
    with pytest.raises(ValueError):
        fit_log_log_exponent(pts, predicted=-1.0)  # fewer than 3 points
    bad = pts + [(32, 0.0, 0.0, 1e-3)]
    with pytest.raises(ValueError):
        fit_log_log_exponent(bad, predicted=-1.0)  # nonpositive estimate


def test_fit_log_log_stderr_against_bootstrap():
    rng = np.random.default_rng(2024)
    scales = np.array([8.0, 16.0, 32.0, 64.0, 128.0])
    sigma = np.array([0.05, 0.07, 0.10, 0.14, 0.2])
    z = 2.5758293035489004

    def synth(gen):
        est = 5.0 * scales**-2.0 * np.exp(sigma * gen.standard_normal(5))
        return [(s, e, e * math.exp(-z * sg), e * math.exp(z * sg))
                for s, e, sg in zip(scales, est, sigma)]

    fit = fit_log_log_exponent(synth(rng), predicted=-2.0)
    boots = [fit_log_log_exponent(synth(rng), predicted=-2.0).slope
             for _ in range(400)]
    assert fit.stderr == pytest.approx(float(np.std(boots, ddof=1)), rel=0.3)


def test_hill_on_exact_pareto():
    rng = np.random.default_rng(7)
    q = 2.5
    x = rng.uniform(size=100_000) ** (-1.0 / q)
    est, se = hill_tail_index(x, 1000)
    assert abs(est - q) < 3.0 * se


def test_hill_diverges_on_exponential():
    # no power tail: the estimate drifts with k instead of stabilizing
    rng = np.random.default_rng(8)
    x = rng.exponential(size=100_000)
    small_k, _ = hill_tail_index(x, 100)
    large_k, _ = hill_tail_index(x, 20_000)
    assert small_k > 1.5 * large_k


def test_hill_validation():
    with pytest.raises(ValueError):
        hill_tail_index([1.0, 2.0, 3.0], 3)
    assert default_hill_k(10**6) == min(math.ceil(10**3.6), 10**5)


def test_fit_tail_index_on_pareto():
    rng = np.random.default_rng(9)
    q = 3.0
    n = 200_000
    x = rng.uniform(size=n) ** (-1.0 / q)
    fit = fit_tail_index(x, None, predicted=q)
    assert abs(fit.hill.slope - q) < 4.0 * fit.hill.stderr
    assert fit.survival.slope == pytest.approx(-q, abs=0.15)
    assert fit.censored_fraction == 0.0


def test_fit_tail_index_censoring_preconditions():
    x = np.concatenate([np.linspace(1, 10, 1000), [5.0] * 10])
    cens = np.zeros(1010, dtype=bool)
    cens[-10:] = True  # censored below the top-k threshold
    with pytest.raises(ValueError):
        fit_tail_index(x, cens, k=100)


def test_survival_regression_zero_survival_rejected():
    x = np.linspace(1.0, 2.0, 100)
    with pytest.raises(ValueError):
        survival_regression(x, None, (1.0, 3.0))


def test_fit_cylinder_decay_exact_exponential():
    t = np.linspace(0.5, 10.0, 40)
    surv = np.exp(-2.0 * t)
    curve = SurvivalCurve(times=t, survival=surv, ci_lo=surv * 0.9,
                          ci_hi=np.minimum(surv * 1.1, 1.0), n=10**6,
                          censored_fraction=0.0)
    fit = fit_cylinder_decay(curve, (0.5, 10.0))
    assert fit.lambda_hat == pytest.approx(2.0, rel=1e-12)
    assert fit.r_squared == pytest.approx(1.0, abs=1e-12)


def test_fit_cylinder_decay_flags_preasymptotic_window():
    t = np.linspace(0.05, 2.0, 60)
    surv = 0.5 * np.exp(-0.6 * t) + 0.5 * np.exp(-6.0 * t)
    curve = SurvivalCurve(times=t, survival=surv, ci_lo=surv * 0.9,
                          ci_hi=np.minimum(surv * 1.1, 1.0), n=10**6,
                          censored_fraction=0.0)
    fit = fit_cylinder_decay(curve, (0.05, 2.0))
    assert fit.r_squared < 0.99  # diagnostic, not an error


def test_fit_cylinder_decay_window_validation():
    t = np.linspace(0.5, 4.0, 20)
    surv = np.exp(-t)
    surv[-1] = 0.0
    curve = SurvivalCurve(times=t, survival=surv, ci_lo=surv, ci_hi=surv,
                          n=100, censored_fraction=0.0)
    with pytest.raises(ValueError):
        fit_cylinder_decay(curve, (0.5, 4.0))


@requires_compiled
def test_cylinder_decay_rate_scales_with_radius():
    # doubling the transverse radius divides the rate by about 2^alpha
    rates = {}
    for r in (1.0, 2.0):
        tube = InfiniteCylinder(radius=r, d=2)
        times, cens, _ = euler_sample(tube, [0.0, 0.0], PARAMS, h=5e-3 * r,
                                      t_max=60.0 * r, n=30_000,
                                      rng=RngStream(61, int(r)))
        grid = np.linspace(0.2 * r, 30.0 * r, 120)
        curve = survival_from_times(times, cens.astype(bool), grid)
        mask = (curve.survival <= 0.5) & (curve.survival >= 1e-3)
        lo = float(curve.times[np.argmax(mask)])
        hi = float(curve.times[len(mask) - 1 - np.argmax(mask[::-1])])
        rates[r] = fit_cylinder_decay(curve, (lo, hi)).lambda_hat
    assert rates[2.0] / rates[1.0] == pytest.approx(2.0**-1.0, rel=0.10)


def test_moment_estimate_trivial_and_stable():
    m = moment_estimate(np.array([0.3, 2.0, 5.5]), 0.0, 0.0)
    assert m.value == 1.0
    assert m.rel_change_last_doubling == 0.0

    rng = np.random.default_rng(11)
    x = rng.uniform(size=200_000) ** (-1.0 / 3.0)  # tail index 3
    stable = moment_estimate(x, 0.0, 1.5)
    assert stable.stable and stable.rel_change_last_doubling < 0.05
    divergent = moment_estimate(x, 0.0, 3.6)
    assert not divergent.stable
    d = divergent.doubling_estimates
    assert d[-1] > d[max(0, len(d) - 7)]  # running estimate drifts upward


def test_moment_estimate_validation():
    with pytest.raises(ValueError):
        moment_estimate(np.array([1.0]), 0.0, -1.0)
    with pytest.raises(ValueError):
        moment_estimate(np.array([]), 0.0, 1.0)


@requires_compiled
def test_harmonic_escape_probability_matches_manual_count():
    est = harmonic_escape_probability(REGION, 8.0, [1.0, 0.0], PARAMS, 20_000,
                                      RngStream(62, 0))
    assert est.ci_lo <= est.estimate <= est.ci_hi
    assert est.max_steps_exceeded == 0
    pts, _, _, status = wob_sample(RegionSlice(REGION, 0.0, 8.0), [1.0, 0.0],
                                   PARAMS, 20_000, RngStream(62, 0))
    manual = int(REGION.contains_batch(pts[status == 0]).sum())
    assert est.hits == manual


def test_harmonic_escape_probability_start_hypothesis():
    with pytest.raises(ValueError):
        harmonic_escape_probability(REGION, 8.0, [5.0, 0.0], PARAMS, 10,
                                    RngStream(0))


@requires_compiled
def test_lemma2_ratio_stays_in_band():
    """Escape estimates over far slices track the closed-form bound shape
    within a bounded constant across scales (the constant is existential)."""
    ratios = []
    for i, s in enumerate((8.0, 16.0, 32.0, 64.0)):
        u = s + s**0.5
        n = 400_000
        pts, _, _, status = wob_sample(RegionSlice(REGION, 0.0, s), [1.0, 0.0],
                                       PARAMS, n, RngStream(63, i))
        ok = status == 0
        tgt = RegionSlice(REGION, u, math.inf)
        k = int(tgt.contains_batch(pts[ok]).sum())
        est = k / int(ok.sum())
        assert k >= 25, (s, k)
        ratios.append(est / lemma2_bound(s, u, math.inf, 1.0, 0.5, 2))
    assert max(ratios) / min(ratios) < 10.0


@requires_compiled
def test_eq5_single_constant_covers_all_slices():
    """One constant fitted on the nearest slice dominates the cylinder
    escape estimates on every other tested slice."""
    s = 8.0
    x0 = [1.0, 0.0]
    cyl = Cylinder(s=s, beta=0.5, d=2)
    gate = s + s**0.5  # spike term of the bound is active only below this
    slices = [(s, gate), (gate, 2 * s), (2 * s, 4 * s), (4 * s, math.inf)]
    n = 300_000
    pts, _, _, status = wob_sample(cyl, x0, PARAMS, n, RngStream(64, 0))
    ok = status == 0
    n_eff = int(ok.sum())
    rows = []
    for u, v in slices:
        tgt = RegionSlice(REGION, u, v)
        k = int(tgt.contains_batch(pts[ok]).sum())
        bound = cylinder_jump_bound(s, u, v, x0, 1.0, 0.5, 2)
        lo, hi = clopper_pearson(k, n_eff)
        rows.append((k / n_eff, hi, bound))
    # calibrate on the ring just past the gate: the bound's max(spike, 1)
    # kink makes it locally tightest there, so that ratio dominates
    c_fit = rows[1][1] / rows[1][2]
    for i, (est, _, bound) in enumerate(rows):
        if i != 1:
            assert est <= c_fit * bound, (i, est, c_fit * bound)


@requires_compiled
@pytest.mark.xfail(strict=True,
                   reason="pre-asymptotic at desk scale: the fixed-start decay "
                          "exponent sits near -1.8 for s <= 64 and regains the "
                          "predicted -1.5 only at much larger scales (single-jump "
                          "quadrature analysis, see README); the "
                          "proportional-start exponent converges fast, so the "
                          "measured gap exceeds alpha*beta + 0.2")
def test_lemma4_start_point_exponent_gap():
    """Fixed-start decay should be steeper than proportional-start decay by
    about alpha*beta."""
    def slope(start_mode, sid):
        pts_fit = []
        for i, s in enumerate((8.0, 16.0, 32.0, 64.0)):
            x0 = [1.0, 0.0] if start_mode == "fixed" else [s / 2.0, 0.0]
            n = 400_000
            pts, _, _, status = wob_sample(RegionSlice(REGION, 0.0, s), x0,
                                           PARAMS, n, RngStream(65, sid + i))
            ok = status == 0
            k = int(REGION.contains_batch(pts[ok]).sum())
            lo, hi = clopper_pearson(k, int(ok.sum()))
            pts_fit.append((s, k / int(ok.sum()), lo, hi))
        return fit_log_log_exponent(pts_fit, predicted=0.0).slope

    gap = slope("proportional", 100) - slope("fixed", 200)
    assert gap == pytest.approx(0.5, abs=0.2)

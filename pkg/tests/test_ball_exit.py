import math

import numpy as np
import pytest
from scipy import integrate, stats

from stable_exit import _pykernels
from stable_exit.ball_exit import (
    BallExitLaw,
    exit_radius_cdf,
    exit_radius_density,
    mean_exit_time_ball,
    mean_exit_time_constant,
    poisson_constant,
    poisson_density,
    sample_ball_exit,
)
from stable_exit.geometry import Ball
from stable_exit.rng import RngStream
from stable_exit.stable_sampling import StableParams
from stable_exit.walkers import euler_sample

from conftest import requires_compiled


def test_poisson_constant_examples():
    assert poisson_constant(2, 1.0) == pytest.approx(1.0 / math.pi**2, rel=1e-14)
    assert poisson_constant(3, 1.0) == pytest.approx(1.0 / (2.0 * math.pi**2), rel=1e-14)
    assert poisson_constant(2, 1e-8) < 1e-8
    with pytest.raises(ValueError):
        poisson_constant(1, 1.0)
    with pytest.raises(ValueError):
        poisson_constant(2, 2.0)


def test_poisson_density_example():
    params = StableParams(alpha=1.0, d=2)
    val = poisson_density(1.0, [0.0, 0.0], [2.0, 0.0], params)
    want = (1.0 / math.pi**2) * math.sqrt(1.0 / 3.0) * 0.25
    assert val == pytest.approx(want, rel=1e-13)
    assert want == pytest.approx(0.014625, abs=1e-5)


def test_poisson_density_zero_inside_ball():
    params = StableParams(alpha=1.0, d=2)
    assert poisson_density(1.0, [0.0, 0.0], [0.9, 0.0], params) == 0.0
    assert poisson_density(1.0, [0.0, 0.0], [1.0, 0.0], params) == 0.0
    with pytest.raises(ValueError):
        poisson_density(1.0, [1.0, 0.0], [2.0, 0.0], params)  # |x| = r


def test_poisson_density_rotationally_symmetric_from_center():
    params = StableParams(alpha=0.7, d=3)
    vals = []
    for th in (0.0, 0.4, 1.1, 2.0):
        y = 3.0 * np.array([math.cos(th), math.sin(th), 0.0])
        vals.append(poisson_density(1.0, [0.0, 0.0, 0.0], y, params))
    assert max(vals) == pytest.approx(min(vals), rel=1e-12)


@pytest.mark.parametrize("d", [2, 3])
@pytest.mark.parametrize("alpha", [0.5, 1.0, 1.5])
def test_radial_normalization(d, alpha):
    r = 1.0
    f = lambda rho: exit_radius_density(rho, r, d, alpha)
    a, _ = integrate.quad(f, r, 2 * r, limit=400)
    b, _ = integrate.quad(f, 2 * r, np.inf, limit=400)
    assert a + b == pytest.approx(1.0, abs=1e-6)


def test_radial_density_matches_kernel_marginal():
    # exit_radius_density must equal poisson_density * sphere area
    d, alpha, r = 3, 1.2, 2.0
    params = StableParams(alpha=alpha, d=d)
    omega = 2.0 * math.pi ** (d / 2.0) / math.gamma(d / 2.0)
    for rho in (2.5, 4.0, 9.0):
        marginal = poisson_density(r, np.zeros(d), [rho, 0.0, 0.0], params) \
            * omega * rho ** (d - 1)
        assert exit_radius_density(rho, r, d, alpha) == pytest.approx(marginal, rel=1e-12)


def test_beta_radial_cdf_identity():
    # analytic incomplete-Beta CDF vs direct quadrature at 20 points
    for alpha in (0.5, 1.3):
        for i, rho in enumerate(np.geomspace(1.001, 200.0, 20)):
            got = exit_radius_cdf(rho, 1.0, alpha)
            want, err = integrate.quad(lambda x: exit_radius_density(x, 1.0, 2, alpha),
                                       1.0, rho, limit=400)
            assert abs(got - want) < 1e-8, (alpha, rho)


def test_sampler_support_and_symmetry():
    params = StableParams(alpha=1.0, d=2)
    Y = sample_ball_exit(1.0, params, RngStream(31, 0), size=20_000)
    R = np.sqrt((Y**2).sum(axis=1))
    assert np.all(R > 1.0)
    U = Y / R[:, None]
    assert np.all(np.abs(U.mean(axis=0)) < 3.0 / math.sqrt(20_000))


@requires_compiled
def test_sampler_tail_probability_matches_quadrature():
    params = StableParams(alpha=1.0, d=2)
    n = 10**6
    Y = sample_ball_exit(1.0, params, RngStream(32, 0), size=n)
    R = np.sqrt((Y**2).sum(axis=1))
    p_emp = float(np.mean(R > 2.0))
    p_quad, _ = integrate.quad(lambda rho: exit_radius_density(rho, 1.0, 2, 1.0),
                               2.0, np.inf, limit=400)
    assert abs(p_emp - p_quad) < 3.0 / math.sqrt(n)


def chi_square_radial_pvalue(d, alpha, n, seed_stream):
    """Chi-square GOF of binned radii against quadrature bin masses."""
    params = StableParams(alpha=alpha, d=d)
    Y = sample_ball_exit(1.0, params, seed_stream, size=n)
    R = np.sqrt((Y**2).sum(axis=1))
    edges = np.geomspace(1.0, 10.0 ** (3.0 / alpha), 40)
    masses = []
    lo = 1.0
    for hi in edges[1:]:
        v, _ = integrate.quad(lambda rho: exit_radius_density(rho, 1.0, d, alpha),
                              lo, hi, limit=300)
        masses.append(v)
        lo = hi
    # tail bin by complement (the radial normalization to 1 is itself a
    # quadrature-verified invariant)
    masses = np.array([*masses, 1.0 - sum(masses)])
    counts = np.histogram(R, bins=np.concatenate([edges, [np.inf]]))[0]
    expected = n * masses
    keep = expected >= 10.0
    chi2 = float((((counts - expected) ** 2 / expected)[keep]).sum())
    dof = int(keep.sum()) - 1
    return stats.chi2.sf(chi2, dof)


@requires_compiled
def test_sampler_chi_square_spot():
    assert chi_square_radial_pvalue(2, 1.0, 200_000, RngStream(33, 0)) > 0.01
    assert chi_square_radial_pvalue(3, 0.5, 200_000, RngStream(33, 1)) > 0.01


def test_mean_exit_time_examples():
    params = StableParams(alpha=1.0, d=2)
    assert mean_exit_time_ball(1.0, 0.0, params) == pytest.approx(2.0 / math.pi, rel=1e-12)
    # exact scaling value(r, 0) / value(1, 0) = r^alpha
    for alpha in (0.6, 1.0, 1.7):
        p = StableParams(alpha=alpha, d=3)
        for r in (0.5, 2.0, 7.0):
            ratio = mean_exit_time_ball(r, 0.0, p) / mean_exit_time_ball(1.0, 0.0, p)
            assert ratio == pytest.approx(r**alpha, rel=1e-12)
    assert mean_exit_time_ball(1.0, 1.0 - 1e-9, params) < 1e-4
    with pytest.raises(ValueError):
        mean_exit_time_ball(1.0, 1.0, params)


@requires_compiled
def test_mean_exit_time_constant_against_euler_oracle():
    # fine-step Euler Monte Carlo validation of the closed-form constant
    params = StableParams(alpha=1.0, d=2)
    times, censored, _ = euler_sample(Ball(radius=1.0, d=2), [0.0, 0.0], params,
                                      h=1e-4, t_max=50.0, n=30_000,
                                      rng=RngStream(34, 0))
    assert censored.sum() == 0
    want = mean_exit_time_ball(1.0, 0.0, params)
    assert float(times.mean()) == pytest.approx(want, rel=0.03)


def test_johnk_guard_resamples_degenerate_draws():
    class Scripted:
        def __init__(self, seq):
            self.seq = list(seq)

        def random(self):
            return self.seq.pop(0)

    # first pair: u = 0 -> x = 0 (rejected by the positivity guard);
    # second pair: valid
    gen = Scripted([0.0, 0.5, 0.25, 0.25])
    v = _pykernels._johnk_beta(gen, 0.5, 0.5)
    assert 0.0 < v < 1.0
    assert gen.seq == []  # consumed exactly two pairs
    # x + y > 1 is rejected as well
    gen = Scripted([0.9, 0.9, 0.09, 0.16])
    v = _pykernels._johnk_beta(gen, 0.5, 0.5)
    assert v == pytest.approx(0.09**2 / (0.09**2 + 0.16**2))


def test_ball_exit_law_wrapper():
    params = StableParams(alpha=1.0, d=2)
    law = BallExitLaw(radius=2.0, center=np.array([5.0, 1.0]), params=params)
    y = law.sample(RngStream(35, 0))
    assert np.linalg.norm(y - [5.0, 1.0]) > 2.0
    assert law.density([5.0, 1.0], [9.0, 1.0]) > 0.0
    assert law.density([5.0, 1.0], [5.5, 1.0]) == 0.0


def test_sample_ball_exit_validation():
    with pytest.raises(ValueError):
        sample_ball_exit(0.0, StableParams(1.0, 2), RngStream(0))


def test_mean_exit_time_constant_values():
    # kappa(2, 1) = 2/pi via Gamma(1.5)^2 = pi/4
    assert mean_exit_time_constant(2, 1.0) == pytest.approx(2.0 / math.pi, rel=1e-12)

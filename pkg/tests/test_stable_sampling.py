import math

import numpy as np
import pytest
from scipy import integrate

from stable_exit.rng import RngStream
from stable_exit.stable_sampling import (
    StableParams,
    sample_isotropic_increment,
    sample_positive_stable,
    sample_sym_stable_1d,
)

from conftest import requires_compiled

N = 10**6


def _ks(a, b):
    a = np.sort(np.asarray(a))
    b = np.sort(np.asarray(b))
    grid = np.concatenate([a, b])
    fa = np.searchsorted(a, grid, side="right") / a.size
    fb = np.searchsorted(b, grid, side="right") / b.size
    return float(np.max(np.abs(fa - fb)))


def test_params_validation():
    with pytest.raises(ValueError):
        StableParams(alpha=2.0, d=2)  # Brownian case excluded
    with pytest.raises(ValueError):
        StableParams(alpha=0.0, d=2)
    with pytest.raises(ValueError):
        StableParams(alpha=1.0, d=1)
    with pytest.raises(ValueError):
        sample_sym_stable_1d(2.0, RngStream(1))
    with pytest.raises(ValueError):
        sample_positive_stable(1.0, RngStream(1))
    with pytest.raises(ValueError):
        sample_isotropic_increment(StableParams(1.0, 2), 0.0, RngStream(1))


def test_scalar_and_batch_agree():
    xs = [sample_sym_stable_1d(1.2, RngStream(3, i)) for i in range(4)]
    batch = [float(sample_sym_stable_1d(1.2, RngStream(3, i), size=1)[0]) for i in range(4)]
    assert xs == batch


def test_determinism_bit_exact():
    a = sample_sym_stable_1d(0.7, RngStream(11, 5), size=1000)
    b = sample_sym_stable_1d(0.7, RngStream(11, 5), size=1000)
    assert np.array_equal(a, b)


@requires_compiled
def test_symmetric_median_near_zero():
    for alpha in (0.5, 1.0, 1.5):
        x = sample_sym_stable_1d(alpha, RngStream(21, int(10 * alpha)), size=N)
        assert abs(np.median(x)) < 0.01


@requires_compiled
def test_cauchy_cdf_at_one():
    # quadrature oracle for the arctan CDF value
    want, err = integrate.quad(lambda x: 1.0 / (math.pi * (1.0 + x * x)), -np.inf, 1.0)
    assert err < 1e-9
    assert want == pytest.approx(0.75, abs=1e-9)
    x = sample_sym_stable_1d(1.0, RngStream(22, 0), size=N)
    assert np.mean(x <= 1.0) == pytest.approx(want, abs=0.005)


def _sym_stable_tail(alpha, t):
    """P(|X| > t) by quadrature of the inversion-formula density."""
    def dens(x):
        val, _ = integrate.quad(lambda xi: math.exp(-xi**alpha), 0.0, np.inf,
                                weight="cos", wvar=x, limit=400)
        return val / math.pi
    inner, _ = integrate.quad(dens, 0.0, t, limit=400)
    return 1.0 - 2.0 * inner


@requires_compiled
def test_symmetric_tail_law_against_quadrature():
    alpha = 1.2
    x = np.abs(sample_sym_stable_1d(alpha, RngStream(23, 0), size=N))
    scaled = []
    for t in (10.0, 30.0, 100.0):
        p_emp = float(np.mean(x > t))
        p_quad = _sym_stable_tail(alpha, t)
        assert p_quad > 0.0
        # empirical vs quadrature within 5 binomial sigmas
        sigma = math.sqrt(p_quad * (1 - p_quad) / N)
        assert abs(p_emp - p_quad) < 5.0 * sigma
        scaled.append(p_emp * t**alpha)
    # t^alpha P(|X| > t) approaches a positive constant
    assert min(scaled) > 0.0
    assert max(scaled) / min(scaled) < 1.25


def test_positive_stable_strictly_positive():
    for rho in (0.25, 0.5, 0.9):
        s = sample_positive_stable(rho, RngStream(24, int(100 * rho)), size=5000)
        assert np.all(s > 0.0)


@requires_compiled
def test_positive_stable_laplace_transform():
    for rho in (0.25, 0.5, 0.8):
        s = sample_positive_stable(rho, RngStream(25, int(100 * rho)), size=N)
        assert np.mean(np.exp(-s)) == pytest.approx(math.exp(-1.0), abs=0.002)
        assert np.mean(np.exp(-4.0 * s)) == pytest.approx(math.exp(-(4.0**rho)), abs=0.002)


@requires_compiled
def test_isotropic_rotation_invariance():
    params = StableParams(alpha=1.0, d=2)
    X = sample_isotropic_increment(params, 1.0, RngStream(26, 0), size=N)
    u = np.array([math.cos(0.7), math.sin(0.7)])
    assert _ks(X[:, 0], X @ u) < 0.005


@requires_compiled
def test_isotropic_characteristic_function_at_unit_xi():
    params = StableParams(alpha=1.0, d=2)
    X = sample_isotropic_increment(params, 1.0, RngStream(27, 0), size=N)
    cf = float(np.mean(np.cos(X[:, 0])))
    assert cf == pytest.approx(math.exp(-1.0), abs=0.005)


@requires_compiled
def test_isotropic_time_scaling():
    params = StableParams(alpha=1.5, d=2)
    t = 3.0
    Xt = sample_isotropic_increment(params, t, RngStream(28, 0), size=N)
    X1 = sample_isotropic_increment(params, 1.0, RngStream(28, 1), size=N)
    assert _ks(Xt[:, 0], t ** (1.0 / 1.5) * X1[:, 0]) < 0.005


@requires_compiled
def test_characteristic_function_grid():
    bound = 4.0 / math.sqrt(N)
    t = 1.0
    for alpha in (0.5, 1.0, 1.5):
        for d in (2, 3):
            X = sample_isotropic_increment(StableParams(alpha, d),
                                           t, RngStream(29, int(10 * alpha) + d), size=N)
            for q in (0.5, 1.0, 2.0):
                xi = np.zeros(d)
                xi[0] = q
                phase = X @ xi
                re = float(np.mean(np.cos(phase)))
                im = float(np.mean(np.sin(phase)))
                want = math.exp(-t * q**alpha)
                assert abs(re - want) < bound, (alpha, d, q)
                assert abs(im) < bound, (alpha, d, q)

"""Pure-Python sampling and walking kernels.

This module is the reference implementation of the hot loops; the compiled
extension ``stable_exit._ckernels`` mirrors it statement by statement.  All
randomness is consumed as raw [0, 1) doubles pulled one at a time from a
numpy BitGenerator, in a fixed draw order, and every transformation uses
plain libm operations, so the two backends produce bit-identical output for
the same stream.  Keep the arithmetic in the two files in lockstep.
"""

import math

import numpy as np

TWO_PI = 2.0 * math.pi
INVPHI = 0.6180339887498949  # (sqrt(5) - 1) / 2, golden-section ratio

# Domain encodings shared with the compiled backend.
DOMAIN_PARABOLA = 0  # params: (beta, a)
DOMAIN_SLICE = 1     # params: (beta, a, u, v); v may be +inf
DOMAIN_CYLINDER = 2  # params: (s, r_transverse); s may be +inf
DOMAIN_BALL = 3      # params: (radius,), centered at the origin

STATUS_EXITED = 0
STATUS_MAX_STEPS = 1

PROFILE_SCAN_POINTS = 48
GOLDEN_TOL = 1e-8
BISECT_TOL = 1e-10


# ---------------------------------------------------------------------------
# scalar random primitives (draw order is part of the backend contract)


def _powb(u, b):
    # pow(u, 0.5) and sqrt(u) both round the exact root, but keep a single
    # code path so the backends cannot disagree.
    if b == 0.5:
        return math.sqrt(u)
    return math.pow(u, b)


def _gauss_pair(gen):
    # Box-Muller; 2 uniforms -> 2 standard normals.
    u1 = 1.0 - gen.random()
    u2 = gen.random()
    r = math.sqrt(-2.0 * math.log(u1))
    t = TWO_PI * u2
    return r * math.cos(t), r * math.sin(t)


def _gauss_vec(gen, d, out):
    i = 0
    while i + 1 < d:
        out[i], out[i + 1] = _gauss_pair(gen)
        i += 2
    if i < d:
        z0, _ = _gauss_pair(gen)
        out[i] = z0


def _sphere_direction(gen, d, out):
    while True:
        _gauss_vec(gen, d, out)
        n2 = 0.0
        for j in range(d):
            n2 += out[j] * out[j]
        if n2 > 0.0:
            inv = 1.0 / math.sqrt(n2)
            for j in range(d):
                out[j] *= inv
            return


def _positive_stable(gen, rho):
    # Kanter's representation of the one-sided stable law with Laplace
    # transform exp(-lambda^rho), 0 < rho < 1.
    while True:
        u = gen.random()
        if u <= 0.0:
            continue
        th = math.pi * u
        w = -math.log(1.0 - gen.random())
        if w <= 0.0:
            continue
        sth = math.sin(th)
        if sth <= 0.0:
            continue
        a = (
            math.sin((1.0 - rho) * th)
            * math.pow(math.sin(rho * th), rho / (1.0 - rho))
            / math.pow(sth, 1.0 / (1.0 - rho))
        )
        s = math.pow(a / w, (1.0 - rho) / rho)
        if s > 0.0 and math.isfinite(s):
            return s


def _sym_stable(gen, alpha):
    # Chambers-Mallows-Stuck for the symmetric law with c.f. exp(-|xi|^alpha).
    while True:
        u = gen.random()
        if u <= 0.0:
            continue
        th = math.pi * (u - 0.5)
        w = -math.log(1.0 - gen.random())
        if w <= 0.0:
            continue
        c = math.cos(th)
        if c <= 0.0:
            continue
        x = (math.sin(alpha * th) / math.pow(c, 1.0 / alpha)) * math.pow(
            math.cos((1.0 - alpha) * th) / w, (1.0 - alpha) / alpha
        )
        if math.isfinite(x):
            return x


def _johnk_beta(gen, a, b):
    # Johnk rejection sampler for Beta(a, b) with 0 < a, b < 1.  The positivity
    # guards resample the astronomically rare pow() underflows instead of
    # emitting a degenerate 0 or 1.
    ia = 1.0 / a
    ib = 1.0 / b
    while True:
        x = math.pow(gen.random(), ia)
        y = math.pow(gen.random(), ib)
        s = x + y
        if s <= 1.0 and x > 0.0 and y > 0.0:
            return x / s


def _ball_exit_offset(gen, d, alpha, radius, out):
    # Exact exit position from the center of a ball of given radius:
    # radial factor radius * V^{-1/2} with V ~ Beta(alpha/2, 1 - alpha/2),
    # direction uniform on the sphere.
    v = _johnk_beta(gen, 0.5 * alpha, 1.0 - 0.5 * alpha)
    rho = radius / math.sqrt(v)
    _sphere_direction(gen, d, out)
    for j in range(d):
        out[j] *= rho


def _isotropic_increment(gen, d, alpha, tpow, out):
    # Subordinated-Gaussian increment: sqrt(2 S) Z with S = tpow * S_1,
    # tpow = t^{2/alpha}, S_1 one-sided (alpha/2)-stable; c.f. exp(-t|xi|^alpha).
    s = tpow * _positive_stable(gen, 0.5 * alpha)
    scale = math.sqrt(2.0 * s)
    _gauss_vec(gen, d, out)
    for j in range(d):
        out[j] *= scale


# ---------------------------------------------------------------------------
# geometry: exact distance to the complement of the parabola-shaped region


def _profile_f(beta, a, x1, rt, u):
    dv = rt - a * _powb(u, beta)
    du = x1 - u
    return du * du + dv * dv


def _profile_fprime(beta, a, x1, rt, u):
    if beta == 0.5:
        g = 1.0 / math.sqrt(u)
    else:
        g = math.pow(u, beta - 1.0)
    return 2.0 * (u - x1) + 2.0 * a * beta * g * (a * _powb(u, beta) - rt)


def parabola_profile_distance(beta, a, x1, rt):
    """Distance from the interior point (x1, |xt|=rt) to the complement of
    {x1 > 0, |xt| < a*x1^beta}, via the 2-D profile-plane reduction.

    Minimizes (x1-u)^2 + (rt - a*u^beta)^2 over u >= 0 with a coarse bracket
    scan, golden-section refinement, and a final bisection on the derivative;
    the hyperplane {x1 <= 0} contributes the competing distance x1.
    """
    u_hi = x1 + rt + 1.0
    step = u_hi / PROFILE_SCAN_POINTS
    best_j = 0
    best_f = _profile_f(beta, a, x1, rt, 0.0)
    for j in range(1, PROFILE_SCAN_POINTS + 1):
        f = _profile_f(beta, a, x1, rt, step * j)
        if f < best_f:
            best_f = f
            best_j = j
    lo = step * (best_j - 1) if best_j > 0 else 0.0
    hi = step * (best_j + 1) if best_j < PROFILE_SCAN_POINTS else u_hi

    c = hi - INVPHI * (hi - lo)
    e = lo + INVPHI * (hi - lo)
    fc = _profile_f(beta, a, x1, rt, c)
    fe = _profile_f(beta, a, x1, rt, e)
    it = 0
    while hi - lo > GOLDEN_TOL and it < 200:
        it += 1
        if fc < fe:
            hi = e
            e = c
            fe = fc
            c = hi - INVPHI * (hi - lo)
            fc = _profile_f(beta, a, x1, rt, c)
        else:
            lo = c
            c = e
            fc = fe
            e = lo + INVPHI * (hi - lo)
            fe = _profile_f(beta, a, x1, rt, e)

    if lo > 0.0:
        glo = _profile_fprime(beta, a, x1, rt, lo)
        ghi = _profile_fprime(beta, a, x1, rt, hi)
        if glo < 0.0 and ghi > 0.0:
            it = 0
            while hi - lo > BISECT_TOL and it < 200:
                it += 1
                mid = 0.5 * (lo + hi)
                if _profile_fprime(beta, a, x1, rt, mid) < 0.0:
                    lo = mid
                else:
                    hi = mid

    fmin = _profile_f(beta, a, x1, rt, 0.5 * (lo + hi))
    if best_f < fmin:
        fmin = best_f
    dist = math.sqrt(fmin)
    return x1 if x1 < dist else dist


def _domain_contains(kind, p, y, d):
    x1 = y[0]
    if kind == DOMAIN_BALL:
        n2 = 0.0
        for j in range(d):
            n2 += y[j] * y[j]
        return math.sqrt(n2) < p[0]
    rt2 = 0.0
    for j in range(1, d):
        rt2 += y[j] * y[j]
    rt = math.sqrt(rt2)
    if kind == DOMAIN_PARABOLA:
        return x1 > 0.0 and rt < p[1] * _powb(x1, p[0])
    if kind == DOMAIN_SLICE:
        return p[2] < x1 < p[3] and x1 > 0.0 and rt < p[1] * _powb(x1, p[0])
    if kind == DOMAIN_CYLINDER:
        return x1 < p[0] and rt < p[1]
    raise ValueError(f"unknown domain kind {kind}")


def _domain_distance(kind, p, y, d):
    x1 = y[0]
    if kind == DOMAIN_BALL:
        n2 = 0.0
        for j in range(d):
            n2 += y[j] * y[j]
        return p[0] - math.sqrt(n2)
    rt2 = 0.0
    for j in range(1, d):
        rt2 += y[j] * y[j]
    rt = math.sqrt(rt2)
    if kind == DOMAIN_CYLINDER:
        dist = p[1] - rt
        if math.isfinite(p[0]):
            dax = p[0] - x1
            if dax < dist:
                dist = dax
        return dist
    dist = parabola_profile_distance(p[0], p[1], x1, rt)
    if kind == DOMAIN_SLICE:
        dlo = x1 - p[2]
        if dlo < dist:
            dist = dlo
        if math.isfinite(p[3]):
            dhi = p[3] - x1
            if dhi < dist:
                dist = dhi
    return dist


def domain_contains(kind, params, x):
    """Scalar open-set membership used by the walking kernels."""
    return _domain_contains(int(kind), params, x, len(x))


def domain_distance(kind, params, x):
    """Distance from an interior point to the complement of the domain."""
    return _domain_distance(int(kind), params, x, len(x))


# ---------------------------------------------------------------------------
# batched samplers


def sym_stable_batch(bitgen, alpha, n):
    gen = np.random.Generator(bitgen)
    out = np.empty(n)
    for i in range(n):
        out[i] = _sym_stable(gen, alpha)
    return out


def positive_stable_batch(bitgen, rho, n):
    gen = np.random.Generator(bitgen)
    out = np.empty(n)
    for i in range(n):
        out[i] = _positive_stable(gen, rho)
    return out


def isotropic_increment_batch(bitgen, d, alpha, t, n):
    gen = np.random.Generator(bitgen)
    tpow = math.pow(t, 2.0 / alpha)
    out = np.empty((n, d))
    buf = np.empty(d)
    for i in range(n):
        _isotropic_increment(gen, d, alpha, tpow, buf)
        for j in range(d):
            out[i, j] = buf[j]
    return out


def ball_exit_batch(bitgen, d, alpha, radius, n):
    gen = np.random.Generator(bitgen)
    out = np.empty((n, d))
    buf = np.empty(d)
    for i in range(n):
        _ball_exit_offset(gen, d, alpha, radius, buf)
        for j in range(d):
            out[i, j] = buf[j]
    return out


# ---------------------------------------------------------------------------
# walk-on-balls and Euler-scheme batch kernels


def wob_batch(bitgen, kind, params, x0, alpha, gamma, max_steps, n_walks, kappa):
    """Run n_walks independent walk-on-balls trajectories.

    Returns (exit_points, steps, mean_time, status) arrays.  kappa is the
    unit-ball mean-exit-time constant, precomputed by the caller so both
    backends consume the identical double.
    """
    gen = np.random.Generator(bitgen)
    kind = int(kind)
    d = len(x0)
    exit_points = np.empty((n_walks, d))
    steps = np.empty(n_walks, dtype=np.int64)
    mean_time = np.empty(n_walks)
    status = np.empty(n_walks, dtype=np.uint8)
    y = np.empty(d)
    delta = np.empty(d)
    for w in range(n_walks):
        for j in range(d):
            y[j] = x0[j]
        acc = 0.0
        nstep = 0
        st = STATUS_MAX_STEPS
        while nstep < max_steps:
            nstep += 1
            r = gamma * _domain_distance(kind, params, y, d)
            acc += kappa * math.pow(r, alpha)
            _ball_exit_offset(gen, d, alpha, r, delta)
            for j in range(d):
                y[j] += delta[j]
            if not _domain_contains(kind, params, y, d):
                st = STATUS_EXITED
                break
        for j in range(d):
            exit_points[w, j] = y[j]
        steps[w] = nstep
        mean_time[w] = acc
        status[w] = st
    return exit_points, steps, mean_time, status


def euler_batch(bitgen, kind, params, x0, alpha, h, t_max, n_walks):
    """Euler scheme X_{(k+1)h} = X_{kh} + h^{1/alpha} xi_k until exit or t_max.

    Returns (times, censored, exit_points); censored walks report time t_max
    and their final (interior) position.
    """
    gen = np.random.Generator(bitgen)
    kind = int(kind)
    d = len(x0)
    hpow = math.pow(h, 2.0 / alpha)
    rho = 0.5 * alpha
    times = np.empty(n_walks)
    censored = np.empty(n_walks, dtype=np.uint8)
    exit_points = np.empty((n_walks, d))
    y = np.empty(d)
    z = np.empty(d)
    for w in range(n_walks):
        for j in range(d):
            y[j] = x0[j]
        k = 0
        while True:
            s = hpow * _positive_stable(gen, rho)
            scale = math.sqrt(2.0 * s)
            _gauss_vec(gen, d, z)
            for j in range(d):
                y[j] += scale * z[j]
            k += 1
            t = k * h
            if not _domain_contains(kind, params, y, d):
                times[w] = t
                censored[w] = 0
                break
            if t >= t_max:
                times[w] = t_max
                censored[w] = 1
                break
        for j in range(d):
            exit_points[w, j] = y[j]
    return times, censored, exit_points


def euler_batch_coupled(bitgen, kind, params, x0, alpha, h, t_max, n_walks):
    """Euler walks at step h plus the coupled 2h-subsampled coarse walks.

    The coarse chain is the same trajectory observed only at even grid
    points, so the pair gives a low-variance step-halving diagnostic.
    Returns (times_fine, cens_fine, times_coarse, cens_coarse, exit_points).
    """
    gen = np.random.Generator(bitgen)
    kind = int(kind)
    d = len(x0)
    hpow = math.pow(h, 2.0 / alpha)
    rho = 0.5 * alpha
    tf = np.empty(n_walks)
    cf = np.empty(n_walks, dtype=np.uint8)
    tc = np.empty(n_walks)
    cc = np.empty(n_walks, dtype=np.uint8)
    exit_points = np.empty((n_walks, d))
    y = np.empty(d)
    z = np.empty(d)
    for w in range(n_walks):
        for j in range(d):
            y[j] = x0[j]
        k = 0
        fine_done = False
        while True:
            s = hpow * _positive_stable(gen, rho)
            scale = math.sqrt(2.0 * s)
            _gauss_vec(gen, d, z)
            for j in range(d):
                y[j] += scale * z[j]
            k += 1
            t = k * h
            inside = _domain_contains(kind, params, y, d)
            if not fine_done and not inside:
                tf[w] = t
                cf[w] = 0
                for j in range(d):
                    exit_points[w, j] = y[j]
                fine_done = True
            if k % 2 == 0 and not inside:
                tc[w] = t
                cc[w] = 0
                break
            if t >= t_max:
                if not fine_done:
                    tf[w] = t_max
                    cf[w] = 1
                    for j in range(d):
                        exit_points[w, j] = y[j]
                tc[w] = t_max
                cc[w] = 1
                break
    return tf, cf, tc, cc, exit_points

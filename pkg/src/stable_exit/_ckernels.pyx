# cython: boundscheck=False, wraparound=False, cdivision=True, language_level=3
"""Compiled sampling and walking kernels.

Statement-for-statement mirror of ``stable_exit._pykernels``; see that module
for the algorithm notes.  Both backends pull raw [0, 1) doubles from the same
BitGenerator one at a time and apply identical libm arithmetic, so outputs
agree bit for bit (enforced by the backend parity tests).
"""

import numpy as np

from cpython.pycapsule cimport PyCapsule_GetPointer, PyCapsule_IsValid
from libc.math cimport M_PI, cos, isfinite, log, pow, sin, sqrt
from numpy.random cimport bitgen_t

cdef double TWO_PI = 2.0 * M_PI
cdef double INVPHI = 0.6180339887498949

DOMAIN_PARABOLA = 0
DOMAIN_SLICE = 1
DOMAIN_CYLINDER = 2
DOMAIN_BALL = 3

STATUS_EXITED = 0
STATUS_MAX_STEPS = 1

cdef int PROFILE_SCAN_POINTS = 48
cdef double GOLDEN_TOL = 1e-8
cdef double BISECT_TOL = 1e-10

cdef int K_PARABOLA = 0
cdef int K_SLICE = 1
cdef int K_CYLINDER = 2
cdef int K_BALL = 3


cdef bitgen_t *_capsule(bit_generator) except NULL:
    capsule = bit_generator.capsule
    if not PyCapsule_IsValid(capsule, "BitGenerator"):
        raise ValueError("invalid BitGenerator capsule")
    return <bitgen_t *> PyCapsule_GetPointer(capsule, "BitGenerator")


cdef inline double _u01(bitgen_t *rng) noexcept nogil:
    return rng.next_double(rng.state)


cdef inline double _powb(double u, double b) noexcept nogil:
    if b == 0.5:
        return sqrt(u)
    return pow(u, b)


cdef inline void _gauss_pair(bitgen_t *rng, double *z0, double *z1) noexcept nogil:
    cdef double u1 = 1.0 - _u01(rng)
    cdef double u2 = _u01(rng)
    cdef double r = sqrt(-2.0 * log(u1))
    cdef double t = TWO_PI * u2
    z0[0] = r * cos(t)
    z1[0] = r * sin(t)


cdef void _gauss_vec(bitgen_t *rng, int d, double *out) noexcept nogil:
    cdef int i = 0
    cdef double z0, z1
    while i + 1 < d:
        _gauss_pair(rng, &z0, &z1)
        out[i] = z0
        out[i + 1] = z1
        i += 2
    if i < d:
        _gauss_pair(rng, &z0, &z1)
        out[i] = z0


cdef void _sphere_direction(bitgen_t *rng, int d, double *out) noexcept nogil:
    cdef double n2, inv
    cdef int j
    while True:
        _gauss_vec(rng, d, out)
        n2 = 0.0
        for j in range(d):
            n2 += out[j] * out[j]
        if n2 > 0.0:
            inv = 1.0 / sqrt(n2)
            for j in range(d):
                out[j] *= inv
            return


cdef double _positive_stable(bitgen_t *rng, double rho) noexcept nogil:
    cdef double u, th, w, sth, a, s
    while True:
        u = _u01(rng)
        if u <= 0.0:
            continue
        th = M_PI * u
        w = -log(1.0 - _u01(rng))
        if w <= 0.0:
            continue
        sth = sin(th)
        if sth <= 0.0:
            continue
        a = (
            sin((1.0 - rho) * th)
            * pow(sin(rho * th), rho / (1.0 - rho))
            / pow(sth, 1.0 / (1.0 - rho))
        )
        s = pow(a / w, (1.0 - rho) / rho)
        if s > 0.0 and isfinite(s):
            return s


cdef double _sym_stable(bitgen_t *rng, double alpha) noexcept nogil:
    cdef double u, th, w, c, x
    while True:
        u = _u01(rng)
        if u <= 0.0:
            continue
        th = M_PI * (u - 0.5)
        w = -log(1.0 - _u01(rng))
        if w <= 0.0:
            continue
        c = cos(th)
        if c <= 0.0:
            continue
        x = (sin(alpha * th) / pow(c, 1.0 / alpha)) * pow(
            cos((1.0 - alpha) * th) / w, (1.0 - alpha) / alpha
        )
        if isfinite(x):
            return x


cdef double _johnk_beta(bitgen_t *rng, double a, double b) noexcept nogil:
    cdef double ia = 1.0 / a
    cdef double ib = 1.0 / b
    cdef double x, y, s
    while True:
        x = pow(_u01(rng), ia)
        y = pow(_u01(rng), ib)
        s = x + y
        if s <= 1.0 and x > 0.0 and y > 0.0:
            return x / s


cdef void _ball_exit_offset(bitgen_t *rng, int d, double alpha, double radius,
                            double *out) noexcept nogil:
    cdef double v = _johnk_beta(rng, 0.5 * alpha, 1.0 - 0.5 * alpha)
    cdef double rho = radius / sqrt(v)
    cdef int j
    _sphere_direction(rng, d, out)
    for j in range(d):
        out[j] *= rho


cdef void _isotropic_increment(bitgen_t *rng, int d, double alpha, double tpow,
                               double *out) noexcept nogil:
    cdef double s = tpow * _positive_stable(rng, 0.5 * alpha)
    cdef double scale = sqrt(2.0 * s)
    cdef int j
    _gauss_vec(rng, d, out)
    for j in range(d):
        out[j] *= scale


# ---------------------------------------------------------------------------
# geometry


cdef inline double _profile_f(double beta, double a, double x1, double rt,
                              double u) noexcept nogil:
    cdef double dv = rt - a * _powb(u, beta)
    cdef double du = x1 - u
    return du * du + dv * dv


cdef inline double _profile_fprime(double beta, double a, double x1, double rt,
                                   double u) noexcept nogil:
    cdef double g
    if beta == 0.5:
        g = 1.0 / sqrt(u)
    else:
        g = pow(u, beta - 1.0)
    return 2.0 * (u - x1) + 2.0 * a * beta * g * (a * _powb(u, beta) - rt)


cdef double _parabola_profile_distance(double beta, double a, double x1,
                                       double rt) noexcept nogil:
    cdef double u_hi = x1 + rt + 1.0
    cdef double step = u_hi / PROFILE_SCAN_POINTS
    cdef int best_j = 0
    cdef double best_f = _profile_f(beta, a, x1, rt, 0.0)
    cdef double f, lo, hi, c, e, fc, fe, glo, ghi, mid, fmin, dist
    cdef int j, it
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
    dist = sqrt(fmin)
    return x1 if x1 < dist else dist


cdef bint _domain_contains(int kind, double *p, double *y, int d) noexcept nogil:
    cdef double x1 = y[0]
    cdef double n2, rt2, rt
    cdef int j
    if kind == K_BALL:
        n2 = 0.0
        for j in range(d):
            n2 += y[j] * y[j]
        return sqrt(n2) < p[0]
    rt2 = 0.0
    for j in range(1, d):
        rt2 += y[j] * y[j]
    rt = sqrt(rt2)
    if kind == K_PARABOLA:
        return x1 > 0.0 and rt < p[1] * _powb(x1, p[0])
    if kind == K_SLICE:
        return p[2] < x1 < p[3] and x1 > 0.0 and rt < p[1] * _powb(x1, p[0])
    return x1 < p[0] and rt < p[1]


cdef double _domain_distance(int kind, double *p, double *y, int d) noexcept nogil:
    cdef double x1 = y[0]
    cdef double n2, rt2, rt, dist, dax, dlo, dhi
    cdef int j
    if kind == K_BALL:
        n2 = 0.0
        for j in range(d):
            n2 += y[j] * y[j]
        return p[0] - sqrt(n2)
    rt2 = 0.0
    for j in range(1, d):
        rt2 += y[j] * y[j]
    rt = sqrt(rt2)
    if kind == K_CYLINDER:
        dist = p[1] - rt
        if isfinite(p[0]):
            dax = p[0] - x1
            if dax < dist:
                dist = dax
        return dist
    dist = _parabola_profile_distance(p[0], p[1], x1, rt)
    if kind == K_SLICE:
        dlo = x1 - p[2]
        if dlo < dist:
            dist = dlo
        if isfinite(p[3]):
            dhi = p[3] - x1
            if dhi < dist:
                dist = dhi
    return dist


def parabola_profile_distance(double beta, double a, double x1, double rt):
    """Compiled twin of the pure profile-distance minimizer."""
    return _parabola_profile_distance(beta, a, x1, rt)


def domain_contains(kind, params, x):
    cdef double[::1] p = np.ascontiguousarray(params, dtype=np.float64)
    cdef double[::1] y = np.ascontiguousarray(x, dtype=np.float64)
    return bool(_domain_contains(int(kind), &p[0], &y[0], y.shape[0]))


def domain_distance(kind, params, x):
    cdef double[::1] p = np.ascontiguousarray(params, dtype=np.float64)
    cdef double[::1] y = np.ascontiguousarray(x, dtype=np.float64)
    return _domain_distance(int(kind), &p[0], &y[0], y.shape[0])


# ---------------------------------------------------------------------------
# batched samplers


def sym_stable_batch(bitgen, double alpha, Py_ssize_t n):
    cdef bitgen_t *rng = _capsule(bitgen)
    out_arr = np.empty(n)
    cdef double[::1] out = out_arr
    cdef Py_ssize_t i
    for i in range(n):
        out[i] = _sym_stable(rng, alpha)
    return out_arr


def positive_stable_batch(bitgen, double rho, Py_ssize_t n):
    cdef bitgen_t *rng = _capsule(bitgen)
    out_arr = np.empty(n)
    cdef double[::1] out = out_arr
    cdef Py_ssize_t i
    for i in range(n):
        out[i] = _positive_stable(rng, rho)
    return out_arr


def isotropic_increment_batch(bitgen, int d, double alpha, double t, Py_ssize_t n):
    cdef bitgen_t *rng = _capsule(bitgen)
    cdef double tpow = pow(t, 2.0 / alpha)
    out_arr = np.empty((n, d))
    cdef double[:, ::1] out = out_arr
    cdef double buf[64]
    cdef Py_ssize_t i
    cdef int j
    for i in range(n):
        _isotropic_increment(rng, d, alpha, tpow, buf)
        for j in range(d):
            out[i, j] = buf[j]
    return out_arr


def ball_exit_batch(bitgen, int d, double alpha, double radius, Py_ssize_t n):
    cdef bitgen_t *rng = _capsule(bitgen)
    out_arr = np.empty((n, d))
    cdef double[:, ::1] out = out_arr
    cdef double buf[64]
    cdef Py_ssize_t i
    cdef int j
    for i in range(n):
        _ball_exit_offset(rng, d, alpha, radius, buf)
        for j in range(d):
            out[i, j] = buf[j]
    return out_arr


# ---------------------------------------------------------------------------
# walk-on-balls and Euler-scheme batch kernels


def wob_batch(bitgen, kind, params, x0, double alpha, double gamma,
              long max_steps, Py_ssize_t n_walks, double kappa):
    cdef bitgen_t *rng = _capsule(bitgen)
    cdef int ikind = int(kind)
    cdef double[::1] p = np.ascontiguousarray(params, dtype=np.float64)
    cdef double[::1] start = np.ascontiguousarray(x0, dtype=np.float64)
    cdef int d = start.shape[0]
    exit_arr = np.empty((n_walks, d))
    steps_arr = np.empty(n_walks, dtype=np.int64)
    mt_arr = np.empty(n_walks)
    status_arr = np.empty(n_walks, dtype=np.uint8)
    cdef double[:, ::1] exit_points = exit_arr
    cdef long[::1] steps = steps_arr
    cdef double[::1] mean_time = mt_arr
    cdef unsigned char[::1] status = status_arr
    cdef double y[64]
    cdef double delta[64]
    cdef double acc, r
    cdef long nstep
    cdef unsigned char st
    cdef Py_ssize_t w
    cdef int j
    with nogil:
        for w in range(n_walks):
            for j in range(d):
                y[j] = start[j]
            acc = 0.0
            nstep = 0
            st = 1
            while nstep < max_steps:
                nstep += 1
                r = gamma * _domain_distance(ikind, &p[0], y, d)
                acc += kappa * pow(r, alpha)
                _ball_exit_offset(rng, d, alpha, r, delta)
                for j in range(d):
                    y[j] += delta[j]
                if not _domain_contains(ikind, &p[0], y, d):
                    st = 0
                    break
            for j in range(d):
                exit_points[w, j] = y[j]
            steps[w] = nstep
            mean_time[w] = acc
            status[w] = st
    return exit_arr, steps_arr, mt_arr, status_arr


def euler_batch(bitgen, kind, params, x0, double alpha, double h, double t_max,
                Py_ssize_t n_walks):
    cdef bitgen_t *rng = _capsule(bitgen)
    cdef int ikind = int(kind)
    cdef double[::1] p = np.ascontiguousarray(params, dtype=np.float64)
    cdef double[::1] start = np.ascontiguousarray(x0, dtype=np.float64)
    cdef int d = start.shape[0]
    cdef double hpow = pow(h, 2.0 / alpha)
    cdef double rho = 0.5 * alpha
    times_arr = np.empty(n_walks)
    cens_arr = np.empty(n_walks, dtype=np.uint8)
    exit_arr = np.empty((n_walks, d))
    cdef double[::1] times = times_arr
    cdef unsigned char[::1] censored = cens_arr
    cdef double[:, ::1] exit_points = exit_arr
    cdef double y[64]
    cdef double z[64]
    cdef double s, scale, t
    cdef long k
    cdef Py_ssize_t w
    cdef int j
    with nogil:
        for w in range(n_walks):
            for j in range(d):
                y[j] = start[j]
            k = 0
            while True:
                s = hpow * _positive_stable(rng, rho)
                scale = sqrt(2.0 * s)
                _gauss_vec(rng, d, z)
                for j in range(d):
                    y[j] += scale * z[j]
                k += 1
                t = k * h
                if not _domain_contains(ikind, &p[0], y, d):
                    times[w] = t
                    censored[w] = 0
                    break
                if t >= t_max:
                    times[w] = t_max
                    censored[w] = 1
                    break
            for j in range(d):
                exit_points[w, j] = y[j]
    return times_arr, cens_arr, exit_arr


def euler_batch_coupled(bitgen, kind, params, x0, double alpha, double h,
                        double t_max, Py_ssize_t n_walks):
    cdef bitgen_t *rng = _capsule(bitgen)
    cdef int ikind = int(kind)
    cdef double[::1] p = np.ascontiguousarray(params, dtype=np.float64)
    cdef double[::1] start = np.ascontiguousarray(x0, dtype=np.float64)
    cdef int d = start.shape[0]
    cdef double hpow = pow(h, 2.0 / alpha)
    cdef double rho = 0.5 * alpha
    tf_arr = np.empty(n_walks)
    cf_arr = np.empty(n_walks, dtype=np.uint8)
    tc_arr = np.empty(n_walks)
    cc_arr = np.empty(n_walks, dtype=np.uint8)
    exit_arr = np.empty((n_walks, d))
    cdef double[::1] tf = tf_arr
    cdef unsigned char[::1] cf = cf_arr
    cdef double[::1] tc = tc_arr
    cdef unsigned char[::1] cc = cc_arr
    cdef double[:, ::1] exit_points = exit_arr
    cdef double y[64]
    cdef double z[64]
    cdef double s, scale, t
    cdef long k
    cdef bint fine_done, inside
    cdef Py_ssize_t w
    cdef int j
    with nogil:
        for w in range(n_walks):
            for j in range(d):
                y[j] = start[j]
            k = 0
            fine_done = False
            while True:
                s = hpow * _positive_stable(rng, rho)
                scale = sqrt(2.0 * s)
                _gauss_vec(rng, d, z)
                for j in range(d):
                    y[j] += scale * z[j]
                k += 1
                t = k * h
                inside = _domain_contains(ikind, &p[0], y, d)
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
    return tf_arr, cf_arr, tc_arr, cc_arr, exit_arr

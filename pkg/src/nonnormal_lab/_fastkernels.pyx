# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled kernels for the hot inner loops.

This module mirrors nonnormal_lab._pykernels expression for expression;
both backends must produce bit-identical outputs (the extension is built
with -ffp-contract=off to keep IEEE semantics aligned with CPython).
"""

from libc.math cimport cos, fabs, isfinite, log, sin, sqrt

import numpy as np

BACKEND_NAME = "cython"

cdef double _INV_2_53 = 1.0 / 9007199254740992.0
cdef double _TWO_PI = 6.283185307179586
cdef unsigned long long _GOLDEN = 0x9E3779B97F4A7C15ULL


cdef inline unsigned long long _mix64(unsigned long long z) nogil:
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL
    return z ^ (z >> 31)


def mix64(z):
    """SplitMix64 finalizer: avalanche a 64-bit word."""
    return int(_mix64(<unsigned long long> (z & 0xFFFFFFFFFFFFFFFF)))


def gaussian_fill(seed, count):
    """Standard normal draws from a SplitMix64 stream via Box-Muller."""
    cdef Py_ssize_t n = count
    out_arr = np.empty(n, dtype=np.float64)
    cdef double[::1] out = out_arr
    cdef unsigned long long state = <unsigned long long> (seed & 0xFFFFFFFFFFFFFFFF)
    cdef unsigned long long z1, z2
    cdef double u1, u2, r, ang
    cdef Py_ssize_t i = 0
    with nogil:
        while i < n:
            state = state + _GOLDEN
            z1 = _mix64(state)
            state = state + _GOLDEN
            z2 = _mix64(state)
            u1 = <double> ((z1 >> 11) + 1) * _INV_2_53
            u2 = <double> (z2 >> 11) * _INV_2_53
            r = sqrt(-2.0 * log(u1))
            ang = _TWO_PI * u2
            out[i] = r * cos(ang)
            i += 1
            if i < n:
                out[i] = r * sin(ang)
                i += 1
    return out_arr


def uniform_fill(seed, count):
    """Uniform [0, 1) draws from a SplitMix64 stream."""
    cdef Py_ssize_t n = count
    out_arr = np.empty(n, dtype=np.float64)
    cdef double[::1] out = out_arr
    cdef unsigned long long state = <unsigned long long> (seed & 0xFFFFFFFFFFFFFFFF)
    cdef Py_ssize_t i
    with nogil:
        for i in range(n):
            state = state + _GOLDEN
            out[i] = <double> (_mix64(state) >> 11) * _INV_2_53
    return out_arr


def ar1_shape(gauss, sigma, a):
    """Shape a (T, m) block of standard normals into AR(1) noise."""
    cdef double[:, ::1] gv = np.ascontiguousarray(gauss, dtype=np.float64)
    cdef Py_ssize_t horizon = gv.shape[0]
    cdef Py_ssize_t channels = gv.shape[1]
    out_arr = np.empty((horizon, channels), dtype=np.float64)
    cdef double[:, ::1] out = out_arr
    cdef double aa = a
    cdef double c0 = sqrt((1.0 - aa) / (1.0 + aa)) * (<double> sigma)
    cdef double gain = (1.0 - aa) * (<double> sigma)
    cdef double w
    cdef Py_ssize_t ch, t
    with nogil:
        for ch in range(channels):
            w = c0 * gv[0, ch]
            out[0, ch] = w
            for t in range(1, horizon):
                w = aa * w + gain * gv[t, ch]
                out[t, ch] = w
    return out_arr


def ema_filter(raw, beta):
    """First-order causal smoother: out[0]=raw[0], then the beta update."""
    cdef double[:, ::1] rv = np.ascontiguousarray(raw, dtype=np.float64)
    cdef Py_ssize_t horizon = rv.shape[0]
    cdef Py_ssize_t channels = rv.shape[1]
    out_arr = np.empty((horizon, channels), dtype=np.float64)
    cdef double[:, ::1] out = out_arr
    cdef double b = beta
    cdef double keep = 1.0 - b
    cdef double prev
    cdef Py_ssize_t ch, t
    with nogil:
        for ch in range(channels):
            prev = rv[0, ch]
            out[0, ch] = prev
            for t in range(1, horizon):
                prev = keep * prev + b * rv[t, ch]
                out[t, ch] = prev
    return out_arr


def linear_rollout(a, g, w, x0):
    """Iterate x_{t+1} = A x_t + G w_t and record x_1..x_T."""
    cdef double[:, ::1] av = np.ascontiguousarray(a, dtype=np.float64)
    cdef double[:, ::1] gv = np.ascontiguousarray(g, dtype=np.float64)
    cdef double[:, ::1] wv = np.ascontiguousarray(w, dtype=np.float64)
    cdef double[::1] x0v = np.ascontiguousarray(x0, dtype=np.float64)
    cdef Py_ssize_t horizon = wv.shape[0]
    cdef Py_ssize_t n = av.shape[0]
    cdef Py_ssize_t m = gv.shape[1]
    states_arr = np.empty((horizon, n), dtype=np.float64)
    cdef double[:, ::1] states = states_arr
    buf_arr = np.empty((2, n), dtype=np.float64)
    cdef double[:, ::1] buf = buf_arr
    cdef double acc
    cdef Py_ssize_t t, i, j, c
    cdef Py_ssize_t cur = 0
    cdef Py_ssize_t nxt
    for i in range(n):
        buf[0, i] = x0v[i]
    with nogil:
        for t in range(horizon):
            nxt = 1 - cur
            for i in range(n):
                acc = 0.0
                for j in range(n):
                    acc += av[i, j] * buf[cur, j]
                for c in range(m):
                    acc += gv[i, c] * wv[t, c]
                buf[nxt, i] = acc
            cur = nxt
            for i in range(n):
                states[t, i] = buf[cur, i]
    return states_arr


cdef inline void _quad_step_scalar(double* s, double u1, double u2,
                                   double mass, double inertia,
                                   double gravity, double dt) nogil:
    cdef double sx = s[0]
    cdef double sz = s[1]
    cdef double th = s[2]
    cdef double vx = s[3]
    cdef double vz = s[4]
    cdef double om = s[5]
    cdef double u1m = u1 / mass
    cdef double tq = u2 / inertia
    cdef double half = 0.5 * dt
    cdef double sixth = dt / 6.0

    cdef double s1 = sin(th)
    cdef double c1 = cos(th)
    cdef double k1_vx = -u1m * s1
    cdef double k1_vz = u1m * c1 - gravity
    cdef double th2 = th + half * om
    cdef double vx2 = vx + half * k1_vx
    cdef double vz2 = vz + half * k1_vz
    cdef double om2 = om + half * tq
    cdef double s2 = sin(th2)
    cdef double c2 = cos(th2)
    cdef double k2_vx = -u1m * s2
    cdef double k2_vz = u1m * c2 - gravity
    cdef double th3 = th + half * om2
    cdef double vx3 = vx + half * k2_vx
    cdef double vz3 = vz + half * k2_vz
    cdef double om3 = om + half * tq
    cdef double s3 = sin(th3)
    cdef double c3 = cos(th3)
    cdef double k3_vx = -u1m * s3
    cdef double k3_vz = u1m * c3 - gravity
    cdef double th4 = th + dt * om3
    cdef double vx4 = vx + dt * k3_vx
    cdef double vz4 = vz + dt * k3_vz
    cdef double om4 = om + dt * tq
    cdef double s4 = sin(th4)
    cdef double c4 = cos(th4)
    cdef double k4_vx = -u1m * s4
    cdef double k4_vz = u1m * c4 - gravity

    s[0] = sx + sixth * (vx + 2.0 * vx2 + 2.0 * vx3 + vx4)
    s[1] = sz + sixth * (vz + 2.0 * vz2 + 2.0 * vz3 + vz4)
    s[2] = th + sixth * (om + 2.0 * om2 + 2.0 * om3 + om4)
    s[3] = vx + sixth * (k1_vx + 2.0 * k2_vx + 2.0 * k3_vx + k4_vx)
    s[4] = vz + sixth * (k1_vz + 2.0 * k2_vz + 2.0 * k3_vz + k4_vz)
    s[5] = om + sixth * (tq + 2.0 * tq + 2.0 * tq + tq)


def quad_step(state, u1, u2, mass, inertia, gravity, dt):
    """One RK4 step of the planar quadrotor under zero-order-hold input."""
    out_arr = np.array(state, dtype=np.float64, copy=True)
    cdef double[::1] out = out_arr
    _quad_step_scalar(&out[0], u1, u2, mass, inertia, gravity, dt)
    return out_arr


def quad_rollout(mass, inertia, gravity, dt, k, u_eq, eta, beta, use_ema,
                 x0, theta_limit, states, u_app):
    """Closed-loop quadrotor rollout; see _pykernels.quad_rollout."""
    cdef double[:, ::1] kv = np.ascontiguousarray(k, dtype=np.float64)
    cdef double[::1] uev = np.ascontiguousarray(u_eq, dtype=np.float64)
    cdef double[:, ::1] ev = np.ascontiguousarray(eta, dtype=np.float64)
    cdef double[::1] x0v = np.ascontiguousarray(x0, dtype=np.float64)
    cdef double[:, ::1] sv = states
    cdef double[:, ::1] uv = u_app
    cdef Py_ssize_t horizon = ev.shape[0]
    cdef double ms = mass
    cdef double iy = inertia
    cdef double gr = gravity
    cdef double h = dt
    cdef double b = beta
    cdef double tl = theta_limit
    cdef bint ema = use_ema
    cdef double x[6]
    cdef double up0, up1, r0, r1, a0, a1
    cdef double prev0 = 0.0
    cdef double prev1 = 0.0
    cdef Py_ssize_t t, i
    cdef Py_ssize_t completed = horizon
    cdef bint ok
    for i in range(6):
        x[i] = x0v[i]
    with nogil:
        for t in range(horizon):
            up0 = uev[0] - (kv[0, 0] * x[0] + kv[0, 1] * x[1] + kv[0, 2] * x[2]
                            + kv[0, 3] * x[3] + kv[0, 4] * x[4] + kv[0, 5] * x[5])
            up1 = uev[1] - (kv[1, 0] * x[0] + kv[1, 1] * x[1] + kv[1, 2] * x[2]
                            + kv[1, 3] * x[3] + kv[1, 4] * x[4] + kv[1, 5] * x[5])
            r0 = up0 + ev[t, 0]
            r1 = up1 + ev[t, 1]
            if ema and t > 0:
                a0 = (1.0 - b) * prev0 + b * r0
                a1 = (1.0 - b) * prev1 + b * r1
            else:
                a0 = r0
                a1 = r1
            prev0 = a0
            prev1 = a1
            _quad_step_scalar(&x[0], a0, a1, ms, iy, gr, h)
            ok = True
            for i in range(6):
                if not isfinite(x[i]):
                    ok = False
                    break
            if not ok or fabs(x[2]) >= tl:
                completed = t
                break
            for i in range(6):
                sv[t, i] = x[i]
            uv[t, 0] = a0
            uv[t, 1] = a1
    return completed

"""Pure-Python kernels: the portable fallback for the hot inner loops.

The compiled module ``nonnormal_lab._fastkernels`` mirrors this file
operation for operation and expression for expression (and is built with
-ffp-contract=off), so both backends produce bit-identical trajectories on
the same platform.  tests/test_backends.py asserts that equivalence
whenever the extension is importable.

Everything here is deliberately scalar and loop-shaped; vectorised numpy
would reorder floating-point reductions and break the cross-backend
contract.
"""

import math

import numpy as np

BACKEND_NAME = "python"

_MASK = (1 << 64) - 1
_GOLDEN = 0x9E3779B97F4A7C15
_INV_2_53 = 1.0 / 9007199254740992.0  # 2**-53
_TWO_PI = 6.283185307179586


def mix64(z):
    """SplitMix64 finalizer: avalanche a 64-bit word."""
    z &= _MASK
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK
    return z ^ (z >> 31)


def gaussian_fill(seed, count):
    """Standard normal draws from a SplitMix64 stream via Box-Muller.

    Pairs are emitted cosine-first; the trailing sine of the last pair is
    dropped for odd counts.  The map from seed to output is a pure
    function: the same (seed, count) always yields the same array.
    """
    out = np.empty(count, dtype=np.float64)
    state = seed & _MASK
    i = 0
    while i < count:
        state = (state + _GOLDEN) & _MASK
        z1 = mix64(state)
        state = (state + _GOLDEN) & _MASK
        z2 = mix64(state)
        u1 = ((z1 >> 11) + 1) * _INV_2_53  # in (0, 1]; log is finite
        u2 = (z2 >> 11) * _INV_2_53        # in [0, 1)
        r = math.sqrt(-2.0 * math.log(u1))
        ang = _TWO_PI * u2
        out[i] = r * math.cos(ang)
        i += 1
        if i < count:
            out[i] = r * math.sin(ang)
            i += 1
    return out


def uniform_fill(seed, count):
    """Uniform [0, 1) draws from a SplitMix64 stream."""
    out = np.empty(count, dtype=np.float64)
    state = seed & _MASK
    for i in range(count):
        state = (state + _GOLDEN) & _MASK
        out[i] = (mix64(state) >> 11) * _INV_2_53
    return out


def ar1_shape(gauss, sigma, a):
    """Shape a (T, m) block of standard normals into AR(1) noise.

    w_0 is a stationary draw; w_t = a*w_{t-1} + (1-a)*sigma*g_t afterwards,
    so the stationary per-channel variance is sigma^2 * (1-a)/(1+a).
    """
    horizon, channels = gauss.shape
    out = np.empty((horizon, channels), dtype=np.float64)
    c0 = math.sqrt((1.0 - a) / (1.0 + a)) * sigma
    gain = (1.0 - a) * sigma
    for ch in range(channels):
        w = c0 * gauss[0, ch]
        out[0, ch] = w
        for t in range(1, horizon):
            w = a * w + gain * gauss[t, ch]
            out[t, ch] = w
    return out


def ema_filter(raw, beta):
    """First-order causal smoother: out[0]=raw[0], then the beta update."""
    horizon, channels = raw.shape
    out = np.empty((horizon, channels), dtype=np.float64)
    keep = 1.0 - beta
    for ch in range(channels):
        prev = raw[0, ch]
        out[0, ch] = prev
        for t in range(1, horizon):
            prev = keep * prev + beta * raw[t, ch]
            out[t, ch] = prev
    return out


def linear_rollout(a, g, w, x0):
    """Iterate x_{t+1} = A x_t + G w_t and record x_1..x_T.

    ``w`` has shape (T, m); the returned array has shape (T, n) with row t
    holding the state reached after consuming w_t.
    """
    horizon = w.shape[0]
    n = a.shape[0]
    m = g.shape[1]
    states = np.empty((horizon, n), dtype=np.float64)
    x = [float(x0[i]) for i in range(n)]
    xn = [0.0] * n
    for t in range(horizon):
        for i in range(n):
            acc = 0.0
            for j in range(n):
                acc += a[i, j] * x[j]
            for c in range(m):
                acc += g[i, c] * w[t, c]
            xn[i] = acc
        x, xn = xn, x
        for i in range(n):
            states[t, i] = x[i]
    return states


def quad_step(state, u1, u2, mass, inertia, gravity, dt):
    """One RK4 step of the planar quadrotor under zero-order-hold input.

    State layout: (x, z, theta, vx, vz, omega).
    """
    sx = float(state[0])
    sz = float(state[1])
    th = float(state[2])
    vx = float(state[3])
    vz = float(state[4])
    om = float(state[5])
    u1m = u1 / mass
    tq = u2 / inertia
    half = 0.5 * dt
    sixth = dt / 6.0

    s1 = math.sin(th)
    c1 = math.cos(th)
    k1_vx = -u1m * s1
    k1_vz = u1m * c1 - gravity
    # stage 2: positions do not feed back into the derivatives
    th2 = th + half * om
    vx2 = vx + half * k1_vx
    vz2 = vz + half * k1_vz
    om2 = om + half * tq
    s2 = math.sin(th2)
    c2 = math.cos(th2)
    k2_vx = -u1m * s2
    k2_vz = u1m * c2 - gravity
    th3 = th + half * om2
    vx3 = vx + half * k2_vx
    vz3 = vz + half * k2_vz
    om3 = om + half * tq
    s3 = math.sin(th3)
    c3 = math.cos(th3)
    k3_vx = -u1m * s3
    k3_vz = u1m * c3 - gravity
    th4 = th + dt * om3
    vx4 = vx + dt * k3_vx
    vz4 = vz + dt * k3_vz
    om4 = om + dt * tq
    s4 = math.sin(th4)
    c4 = math.cos(th4)
    k4_vx = -u1m * s4
    k4_vz = u1m * c4 - gravity

    out = np.empty(6, dtype=np.float64)
    out[0] = sx + sixth * (vx + 2.0 * vx2 + 2.0 * vx3 + vx4)
    out[1] = sz + sixth * (vz + 2.0 * vz2 + 2.0 * vz3 + vz4)
    out[2] = th + sixth * (om + 2.0 * om2 + 2.0 * om3 + om4)
    out[3] = vx + sixth * (k1_vx + 2.0 * k2_vx + 2.0 * k3_vx + k4_vx)
    out[4] = vz + sixth * (k1_vz + 2.0 * k2_vz + 2.0 * k3_vz + k4_vz)
    out[5] = om + sixth * (tq + 2.0 * tq + 2.0 * tq + tq)
    return out


def quad_rollout(mass, inertia, gravity, dt, k, u_eq, eta, beta, use_ema,
                 x0, theta_limit, states, u_app):
    """Closed-loop quadrotor rollout: LQR feedback, additive input noise,
    optional EMA suppressor, RK4 plant.

    Fills ``states`` (T, 6) and ``u_app`` (T, 2) in place and returns the
    number of completed steps; a return value below T means the rollout
    left the valid region (non-finite state or |theta| >= theta_limit) and
    must be discarded by the caller.
    """
    horizon = eta.shape[0]
    x = np.array(x0, dtype=np.float64, copy=True)
    prev0 = 0.0
    prev1 = 0.0
    for t in range(horizon):
        up0 = u_eq[0] - (k[0, 0] * x[0] + k[0, 1] * x[1] + k[0, 2] * x[2]
                         + k[0, 3] * x[3] + k[0, 4] * x[4] + k[0, 5] * x[5])
        up1 = u_eq[1] - (k[1, 0] * x[0] + k[1, 1] * x[1] + k[1, 2] * x[2]
                         + k[1, 3] * x[3] + k[1, 4] * x[4] + k[1, 5] * x[5])
        r0 = up0 + eta[t, 0]
        r1 = up1 + eta[t, 1]
        if use_ema and t > 0:
            a0 = (1.0 - beta) * prev0 + beta * r0
            a1 = (1.0 - beta) * prev1 + beta * r1
        else:
            a0 = r0
            a1 = r1
        prev0 = a0
        prev1 = a1
        x = quad_step(x, a0, a1, mass, inertia, gravity, dt)
        ok = True
        for i in range(6):
            if not math.isfinite(x[i]):
                ok = False
                break
        if not ok or abs(x[2]) >= theta_limit:
            return t
        for i in range(6):
            states[t, i] = x[i]
        u_app[t, 0] = a0
        u_app[t, 1] = a1
    return horizon

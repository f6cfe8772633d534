"""Fixed-step RK4 kernels for the illness-death system and the prevalence ODE.

Rate coefficients arrive packed as float64[6]:
(onset, slope, level, mort_scale, mort_growth, ratio); see RateModel.packed.
"""

import math

import numpy as np

from .._accel import njit


def _rates_py(r, t):
    c12 = r[2] + r[1] * max(0.0, t - r[0])
    c13 = r[3] * math.exp(r[4] * t)
    return c12, c13, r[5] * c13


_rates = njit(cache=True, nogil=True)(_rates_py)


def _rk4_idm_py(r, p0, t0, h, nsteps):
    out = np.empty((nsteps + 1, 3))
    p1, p2, p3 = p0[0], p0[1], p0[2]
    out[0, 0] = p1
    out[0, 1] = p2
    out[0, 2] = p3
    hh = 0.5 * h
    for n in range(nsteps):
        t = t0 + n * h
        a12, a13, a23 = _rates(r, t)
        b12, b13, b23 = _rates(r, t + hh)
        d12, d13, d23 = _rates(r, t0 + (n + 1) * h)

        k11 = -(a12 + a13) * p1
        k12 = a12 * p1 - a23 * p2
        k13 = a13 * p1 + a23 * p2

        q1 = p1 + hh * k11
        q2 = p2 + hh * k12
        k21 = -(b12 + b13) * q1
        k22 = b12 * q1 - b23 * q2
        k23 = b13 * q1 + b23 * q2

        q1 = p1 + hh * k21
        q2 = p2 + hh * k22
        k31 = -(b12 + b13) * q1
        k32 = b12 * q1 - b23 * q2
        k33 = b13 * q1 + b23 * q2

        q1 = p1 + h * k31
        q2 = p2 + h * k32
        k41 = -(d12 + d13) * q1
        k42 = d12 * q1 - d23 * q2
        k43 = d13 * q1 + d23 * q2

        p1 = p1 + h / 6.0 * (k11 + 2.0 * k21 + 2.0 * k31 + k41)
        p2 = p2 + h / 6.0 * (k12 + 2.0 * k22 + 2.0 * k32 + k42)
        p3 = p3 + h / 6.0 * (k13 + 2.0 * k23 + 2.0 * k33 + k43)
        out[n + 1, 0] = p1
        out[n + 1, 1] = p2
        out[n + 1, 2] = p3
    return out


rk4_idm_numba = njit(cache=True, nogil=True)(_rk4_idm_py)


def _rates_vec(r, t):
    c12 = r[2] + r[1] * np.maximum(0.0, t - r[0])
    c13 = r[3] * np.exp(r[4] * t)
    return c12, c13, r[5] * c13


def _generator(r, t):
    c12, c13, c23 = _rates_vec(r, t)
    a = np.zeros((t.size, 3, 3))
    a[:, 0, 0] = -(c12 + c13)
    a[:, 1, 0] = c12
    a[:, 2, 0] = c13
    a[:, 1, 1] = -c23
    a[:, 2, 1] = c23
    return a


def rk4_idm_numpy(r, p0, t0, h, nsteps):
    """Vectorized RK4 for the linear system.

    For p' = A(t) p one RK4 step is p -> M_n p with M_n built from
    A(t), A(t + h/2), A(t + h). The step matrices are lower triangular with a
    unit last column, so the recursion reduces to a cumulative product (p1), a
    first-order linear recurrence (p2) and a cumulative sum (p3).
    """
    r = np.asarray(r, dtype=np.float64)
    t = t0 + h * np.arange(nsteps)
    a1 = _generator(r, t)
    a2 = _generator(r, t + 0.5 * h)
    a4 = _generator(r, t0 + h * np.arange(1, nsteps + 1))
    eye = np.broadcast_to(np.eye(3), a1.shape)
    k1 = a1
    k2 = a2 @ (eye + 0.5 * h * k1)
    k3 = a2 @ (eye + 0.5 * h * k2)
    k4 = a4 @ (eye + h * k3)
    m = eye + h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4)

    out = np.empty((nsteps + 1, 3))
    p1 = np.empty(nsteps + 1)
    p1[0] = p0[0]
    p1[1:] = p0[0] * np.cumprod(m[:, 0, 0])

    m22 = m[:, 1, 1]
    # p2[n] = P[n] * (p2[0] + sum_{j<n} m21[j] p1[j] / P[j+1]),  P[n] = prod_{j<n} m22[j]
    cum = np.empty(nsteps + 1)
    cum[0] = 1.0
    cum[1:] = np.cumprod(m22)
    drive = m[:, 1, 0] * p1[:-1] / cum[1:]
    p2 = np.empty(nsteps + 1)
    p2[0] = p0[1]
    p2[1:] = cum[1:] * (p0[1] + np.cumsum(drive))

    p3 = np.empty(nsteps + 1)
    p3[0] = p0[2]
    p3[1:] = p0[2] + np.cumsum(m[:, 2, 0] * p1[:-1] + m[:, 2, 1] * p2[:-1])

    out[:, 0] = p1
    out[:, 1] = p2
    out[:, 2] = p3
    return out


def _prevalence_rhs(r, t, x):
    c12, c13, c23 = _rates(r, t)
    return (1.0 - x) * (c12 - x * (c23 - c13))


def _rk4_prevalence_py(r, x0, t0, h, nsteps):
    out = np.empty(nsteps + 1)
    x = x0
    out[0] = x
    hh = 0.5 * h
    for n in range(nsteps):
        t = t0 + n * h
        k1 = _prevalence_rhs(r, t, x)
        k2 = _prevalence_rhs(r, t + hh, x + hh * k1)
        k3 = _prevalence_rhs(r, t + hh, x + hh * k2)
        k4 = _prevalence_rhs(r, t0 + (n + 1) * h, x + h * k3)
        x = x + h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
        out[n + 1] = x
    return out


_prevalence_rhs = njit(cache=True, nogil=True)(_prevalence_rhs)
rk4_prevalence_numba = njit(cache=True, nogil=True)(_rk4_prevalence_py)
# The scalar Riccati recursion does not vectorize over time; the interpreted
# loop is the fallback.
rk4_prevalence_numpy = getattr(rk4_prevalence_numba, "py_func", _rk4_prevalence_py)

"""Event-time sampling kernels for the microsimulation.

Each subject owns a counter-based splitmix64 stream; draw j of the stream with
key s is mix64(s + (j + 1) * GOLDEN_GAMMA), mapped to (0, 1) by its top 53
bits. Three draws per subject: first-event time, event type, death after onset.
"""

import math

import numpy as np

from .._accel import njit

GOLDEN_GAMMA = 0x9E3779B97F4A7C15
STREAM_GAMMA = 0xD1B54A32D192ED03
MIX1 = 0xBF58476D1CE4E5B9
MIX2 = 0x94D049BB133111EB
MASK64 = (1 << 64) - 1
TIME_TOL = 1e-10
MAX_BISECT = 200

# status codes returned by the kernels
OK = 0
NO_CONVERGENCE = 1


def mix64_numpy(z):
    z = np.asarray(z, dtype=np.uint64)
    with np.errstate(over="ignore"):
        z = (z ^ (z >> np.uint64(30))) * np.uint64(MIX1)
        z = (z ^ (z >> np.uint64(27))) * np.uint64(MIX2)
    return z ^ (z >> np.uint64(31))


def derive_keys_numpy(seed, index):
    """Sub-stream keys mix64(seed + (index + 1) * STREAM_GAMMA)."""
    idx = np.asarray(index, dtype=np.uint64)
    with np.errstate(over="ignore"):
        z = np.uint64(seed) + (idx + np.uint64(1)) * np.uint64(STREAM_GAMMA)
    return mix64_numpy(z)


def uniforms_numpy(key, counter):
    """Draws number ``counter`` (array) of the stream with key ``key``."""
    c = np.asarray(counter, dtype=np.uint64)
    with np.errstate(over="ignore"):
        z = np.asarray(key, dtype=np.uint64) + (c + np.uint64(1)) * np.uint64(GOLDEN_GAMMA)
    bits = mix64_numpy(z) >> np.uint64(11)
    return (bits.astype(np.float64) + 0.5) * 2.0**-53


@njit(cache=True, nogil=True)
def _mix64(z):
    z = (z ^ (z >> np.uint64(30))) * np.uint64(MIX1)
    z = (z ^ (z >> np.uint64(27))) * np.uint64(MIX2)
    return z ^ (z >> np.uint64(31))


@njit(cache=True, nogil=True)
def _uniform(key, j):
    z = key + (np.uint64(j) + np.uint64(1)) * np.uint64(GOLDEN_GAMMA)
    bits = _mix64(z) >> np.uint64(11)
    return (float(bits) + 0.5) * 2.0**-53


@njit(cache=True, nogil=True)
def _exit_hazard(r, t):
    # integral over [0, t] of c12 + c13
    onset, slope, level, scale, growth = r[0], r[1], r[2], r[3], r[4]
    x = max(0.0, t - onset)
    x0 = max(0.0, -onset)
    inc = level * t + 0.5 * slope * (x * x - x0 * x0)
    if growth == 0.0:
        return inc + scale * t
    return inc + scale * math.expm1(growth * t) / growth


@njit(cache=True, nogil=True)
def _death_after_onset(r, t_onset, e):
    # solve ratio * integral_{t_onset}^{t} c13 = e in closed form; inf if never
    rate = r[5] * r[3]
    growth = r[4]
    if rate <= 0.0:
        return math.inf
    if growth == 0.0:
        return t_onset + e / rate
    z = math.exp(growth * t_onset) + e * growth / rate
    if z <= 0.0:
        return math.inf
    return math.log(z) / growth


def _simulate_py(r, horizon, keys):
    n = keys.size
    onset = np.full(n, np.nan)
    death = np.full(n, np.nan)
    h_end = _exit_hazard(r, horizon)
    for i in range(n):
        key = keys[i]
        e = -math.log(_uniform(key, 0))
        if h_end < e:
            continue
        lo = 0.0
        hi = horizon
        it = 0
        while hi - lo > TIME_TOL:
            mid = 0.5 * (lo + hi)
            if _exit_hazard(r, mid) < e:
                lo = mid
            else:
                hi = mid
            it += 1
            if it > MAX_BISECT:
                return onset, death, NO_CONVERGENCE
        t_event = 0.5 * (lo + hi)
        c12 = r[2] + r[1] * max(0.0, t_event - r[0])
        c13 = r[3] * math.exp(r[4] * t_event)
        if _uniform(key, 1) * (c12 + c13) < c12:
            onset[i] = t_event
            t_death = _death_after_onset(r, t_event, -math.log(_uniform(key, 2)))
            if t_death <= horizon:
                death[i] = t_death
        else:
            death[i] = t_event
    return onset, death, OK


simulate_numba = njit(cache=True, nogil=True)(_simulate_py)


def simulate_numpy(r, horizon, keys):
    """Same sampler vectorized across subjects."""
    r = np.asarray(r, dtype=np.float64)
    onset_age, slope, level, scale, growth, ratio = r
    keys = np.asarray(keys, dtype=np.uint64)
    n = keys.size
    onset = np.full(n, np.nan)
    death = np.full(n, np.nan)
    if n == 0:
        return onset, death, OK

    def exit_hazard(t):
        x = np.maximum(0.0, t - onset_age)
        x0 = max(0.0, -onset_age)
        inc = level * t + 0.5 * slope * (x * x - x0 * x0)
        if growth == 0.0:
            return inc + scale * t
        return inc + scale * np.expm1(growth * t) / growth

    u = uniforms_numpy(keys[:, None], np.arange(3, dtype=np.uint64)[None, :])
    e = -np.log(u[:, 0])
    active = exit_hazard(np.float64(horizon)) >= e
    idx = np.flatnonzero(active)
    e = e[idx]
    lo = np.zeros(idx.size)
    hi = np.full(idx.size, float(horizon))
    it = 0
    # all brackets start equal, so every subject needs the same iteration count
    while idx.size and hi[0] - lo[0] > TIME_TOL:
        mid = 0.5 * (lo + hi)
        below = exit_hazard(mid) < e
        lo = np.where(below, mid, lo)
        hi = np.where(below, hi, mid)
        it += 1
        if it > MAX_BISECT:
            return onset, death, NO_CONVERGENCE
    t_event = 0.5 * (lo + hi)
    c12 = level + slope * np.maximum(0.0, t_event - onset_age)
    c13 = scale * np.exp(growth * t_event)
    is_onset = u[idx, 1] * (c12 + c13) < c12

    onset[idx[is_onset]] = t_event[is_onset]
    death[idx[~is_onset]] = t_event[~is_onset]

    sick = idx[is_onset]
    t_on = t_event[is_onset]
    e2 = -np.log(u[sick, 2])
    rate = ratio * scale
    if rate > 0.0 and sick.size:
        if growth == 0.0:
            t_death = t_on + e2 / rate
        else:
            z = np.exp(growth * t_on) + e2 * growth / rate
            with np.errstate(invalid="ignore", divide="ignore"):
                t_death = np.where(z > 0.0, np.log(np.where(z > 0.0, z, 1.0)) / growth, np.inf)
        keep = t_death <= horizon
        death[sick[keep]] = t_death[keep]
    return onset, death, OK

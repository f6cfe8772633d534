"""Fixed-step RK4 solutions of the illness-death system and the prevalence ODE."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple, Sequence

import numpy as np

from . import _kernels
from .rates import as_rate_model

DEFAULT_STEP = 0.1
SIMPLEX_TOL = 1e-9
CLAMP_TOL = 1e-12
_GRID_TOL = 1e-9


class StateFractions(NamedTuple):
    """Fractions non-diseased, diseased and dead."""

    p1: float
    p2: float
    p3: float


INITIAL_STATE = StateFractions(1.0, 0.0, 0.0)


@dataclass(frozen=True)
class SolutionPath:
    times: np.ndarray
    values: np.ndarray  # shape (len(times), 3)

    def __post_init__(self):
        if len(self.times) != len(self.values):
            raise ValueError("times and values differ in length")
        if np.any(np.diff(self.times) <= 0):
            raise ValueError("times must be strictly increasing")

    def __len__(self):
        return len(self.times)

    def __getitem__(self, k) -> StateFractions:
        return StateFractions(*map(float, self.values[k]))


def grid_indices(output_times, t0: float, step: float) -> np.ndarray:
    """Step numbers of the output times; raises if one is off the grid."""
    if not step > 0:
        raise ValueError(f"step must be positive, got {step}")
    times = np.asarray(output_times, dtype=float)
    pos = (times - t0) / step
    idx = np.rint(pos)
    off = np.abs(pos - idx) > _GRID_TOL * np.maximum(1.0, np.abs(pos))
    if np.any(off):
        raise ValueError(f"output times {times[off].tolist()} are not on the step-{step} grid from t0={t0}")
    if np.any(idx < 0):
        raise ValueError("output times precede t0")
    return idx.astype(np.int64)


def check_simplex(p0) -> np.ndarray:
    p = np.asarray(p0, dtype=float)
    if p.shape != (3,) or np.any(p < 0) or np.any(p > 1) or abs(p.sum() - 1.0) > SIMPLEX_TOL:
        raise ValueError(f"initial state {tuple(p)} is not on the simplex")
    return p


def clamp_fractions(values: np.ndarray) -> np.ndarray:
    """Snap rounding undershoot in [-1e-12, 0) to 0 (and overshoot past 1 to 1)."""
    if np.any(values < -CLAMP_TOL) or np.any(values > 1.0 + CLAMP_TOL):
        raise ValueError("solution left the unit interval beyond rounding slack")
    return np.clip(values, 0.0, 1.0)


def _check_window(idx, t0, t_end, step):
    n_end = (t_end - t0) / step
    if idx.size and idx.max() > n_end + _GRID_TOL * max(1.0, n_end):
        raise ValueError("output times exceed t_end")


def solve_idm(
    theta,
    p0=INITIAL_STATE,
    t0: float = 0.0,
    t_end: float | None = None,
    step: float = DEFAULT_STEP,
    output_times: Sequence[float] = tuple(range(0, 101, 10)),
) -> SolutionPath:
    """Integrate p' = A(t) p with classical RK4 and report p at the output times.

    ``theta`` is a ThetaParams or a RateModel. Output times must fall on the
    solver grid t0 + k * step; nothing is interpolated.
    """
    p = check_simplex(p0)
    idx = grid_indices(output_times, t0, step)
    if t_end is None:
        t_end = t0 + step * (idx.max() if idx.size else 0)
    _check_window(idx, t0, t_end, step)
    path = _kernels.rk4_idm(as_rate_model(theta).packed(), p, float(t0), float(step), int(idx.max()))
    values = clamp_fractions(path[idx])
    return SolutionPath(np.asarray(output_times, dtype=float), values)


def model_fractions(packed_rates: np.ndarray, idx: np.ndarray, step: float) -> np.ndarray:
    """Unchecked fast path for the objectives: p at steps ``idx`` from (1, 0, 0) at t=0."""
    path = _kernels.rk4_idm(packed_rates, np.array([1.0, 0.0, 0.0]), 0.0, step, int(idx[-1]))
    return path[idx]


def solve_prevalence(
    theta,
    pi0: float = 0.0,
    t0: float = 0.0,
    t_end: float | None = None,
    step: float = DEFAULT_STEP,
    output_times: Sequence[float] = tuple(range(0, 101, 10)),
) -> np.ndarray:
    """RK4 for pi' = (1 - pi)(c12 - pi (c23 - c13)), pi = p2 / (p1 + p2)."""
    if not (0.0 <= pi0 <= 1.0) or math.isnan(pi0):
        raise ValueError(f"pi0 must lie in [0, 1], got {pi0}")
    idx = grid_indices(output_times, t0, step)
    if t_end is None:
        t_end = t0 + step * (idx.max() if idx.size else 0)
    _check_window(idx, t0, t_end, step)
    path = _kernels.rk4_prevalence(as_rate_model(theta).packed(), float(pi0), float(t0), float(step), int(idx.max()))
    return path[idx]

"""Individual-level simulation of the illness-death model.

From the non-diseased state the first event time T solves H(T) = -log(u),
where H is the closed-form integral of c12 + c13, found by bisection. The event
is onset with probability c12(T) / (c12(T) + c13(T)), else death. After onset
the Gompertz integral of c23 is inverted in closed form.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from . import _kernels
from ._kernels import microsim as _k
from .rates import as_rate_model
from .rng import RngStream


class State(enum.IntEnum):
    NON_DISEASED = 0
    DISEASED = 1
    DEAD = 2


@dataclass(frozen=True)
class Trajectory:
    onset_time: Optional[float]
    death_time: Optional[float]
    horizon: float

    def __post_init__(self):
        for name in ("onset_time", "death_time"):
            v = getattr(self, name)
            if v is not None and not 0.0 <= v <= self.horizon:
                raise ValueError(f"{name}={v} outside [0, {self.horizon}]")
        if self.onset_time is not None and self.death_time is not None and not self.onset_time < self.death_time:
            raise ValueError("onset must precede death")


class SimulationError(RuntimeError):
    """The event-time root solve failed; indicates a defect, not bad input."""


def _run_kernel(rates, horizon, keys):
    if not horizon > 0:
        raise ValueError(f"horizon must be positive, got {horizon}")
    onset, death, status = _kernels.simulate(rates.packed(), float(horizon), keys)
    if status != _k.OK:
        raise SimulationError(f"event-time bisection did not converge (status {status})")
    return onset, death


def simulate_subject(theta, horizon: float, rng: RngStream) -> Trajectory:
    """One life course starting non-diseased at t=0; consumes three draws of ``rng``."""
    key = np.array([rng.seed], dtype=np.uint64)
    if rng.counter:
        # a stream that has been drawn from continues at its counter
        key = np.array([_offset_key(rng.seed, rng.counter)], dtype=np.uint64)
    onset, death = _run_kernel(as_rate_model(theta), horizon, key)
    rng.counter += 3
    return _trajectory(onset[0], death[0], horizon)


def _offset_key(seed: int, counter: int) -> int:
    # draw j of key (seed + counter * gamma) equals draw counter + j of key seed
    return (seed + counter * _k.GOLDEN_GAMMA) & _k.MASK64


def _trajectory(onset, death, horizon) -> Trajectory:
    return Trajectory(
        None if math.isnan(onset) else float(onset),
        None if math.isnan(death) else float(death),
        float(horizon),
    )


class Population(Sequence):
    """Trajectories stored column-wise; NaN marks an absent event time."""

    def __init__(self, onset: np.ndarray, death: np.ndarray, horizon: float):
        self.onset = onset
        self.death = death
        self.horizon = float(horizon)

    def __len__(self):
        return self.onset.size

    def __getitem__(self, i):
        if isinstance(i, slice):
            return Population(self.onset[i], self.death[i], self.horizon)
        return _trajectory(self.onset[i], self.death[i], self.horizon)

    def states_at(self, t: float) -> np.ndarray:
        return states_at(self.onset, self.death, t)


def simulate_population(n: int, theta, horizon: float, seed: int) -> Population:
    """``n`` independent subjects; subject i uses child stream i of ``seed``.

    Subject i is therefore identical to ``simulate_subject(theta, horizon,
    RngStream(seed).spawn(i))`` regardless of how the population is chunked.
    """
    if n < 1:
        raise ValueError(f"n must be >= 1, got {n}")
    keys = RngStream(seed).spawn_keys(n)
    onset, death = _run_kernel(as_rate_model(theta), horizon, keys)
    return Population(onset, death, horizon)


def states_at(onset: np.ndarray, death: np.ndarray, t: float) -> np.ndarray:
    """Vectorized state classification; NaN comparisons are False, i.e. no event."""
    out = np.full(onset.shape, State.NON_DISEASED, dtype=np.int8)
    out[onset <= t] = State.DISEASED
    out[death <= t] = State.DEAD
    return out


def state_at(traj: Trajectory, t: float) -> State:
    """State at time t; events take effect at their own instant."""
    if not 0.0 <= t <= traj.horizon:
        raise ValueError(f"t={t} outside [0, {traj.horizon}]")
    if traj.death_time is not None and traj.death_time <= t:
        return State.DEAD
    if traj.onset_time is not None and traj.onset_time <= t:
        return State.DISEASED
    return State.NON_DISEASED


def as_population(trajectories) -> Population:
    if isinstance(trajectories, Population):
        return trajectories
    trajectories = list(trajectories)
    onset = np.array([np.nan if tr.onset_time is None else tr.onset_time for tr in trajectories], dtype=float)
    death = np.array([np.nan if tr.death_time is None else tr.death_time for tr in trajectories], dtype=float)
    horizon = min((tr.horizon for tr in trajectories), default=0.0)
    return Population(onset, death, horizon)

"""Visit schema, aggregated current status (ACS) tables and observed fractions."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .microsim import Population, as_population, simulate_population
from .rng import RngStream, derive_seed

PAPER_VISIT_TIMES = tuple(float(t) for t in range(0, 101, 10))
STATE_LABELS = ("Non-diseased", "Diseased", "Dead")


class ZeroTotalError(ValueError):
    """A cross-section without participants; its fractions are undefined."""


@dataclass(frozen=True)
class VisitPlan:
    visit_times: np.ndarray
    mask: np.ndarray  # (n_subjects, K) bool
    p_part: float | None = None

    def __post_init__(self):
        if self.mask.ndim != 2 or self.mask.shape[1] != len(self.visit_times):
            raise ValueError(f"mask shape {self.mask.shape} does not match {len(self.visit_times)} visits")

    @property
    def n_subjects(self) -> int:
        return self.mask.shape[0]


@dataclass(frozen=True)
class AcsTable:
    visit_times: np.ndarray
    counts: np.ndarray  # (K, 3) int64

    def __post_init__(self):
        counts = np.asarray(self.counts)
        if counts.ndim != 2 or counts.shape != (len(self.visit_times), 3):
            raise ValueError(f"counts must have shape ({len(self.visit_times)}, 3), got {counts.shape}")
        if np.any(counts < 0):
            raise ValueError("counts must be nonnegative")

    @property
    def totals(self) -> np.ndarray:
        return self.counts.sum(axis=1)

    def __eq__(self, other):
        if not isinstance(other, AcsTable):
            return NotImplemented
        return np.array_equal(self.visit_times, other.visit_times) and np.array_equal(self.counts, other.counts)


def _check_times(visit_times) -> np.ndarray:
    times = np.asarray(visit_times, dtype=float)
    if times.ndim != 1 or times.size == 0:
        raise ValueError("visit_times must be a non-empty sequence")
    if np.any(np.diff(times) <= 0):
        raise ValueError("visit_times must be strictly increasing")
    return times


def draw_visit_plan(n: int, visit_times: Sequence[float], p_part: float, rng: RngStream) -> VisitPlan:
    """Independent Bernoulli(p_part) participation for every subject and visit.

    Participation ignores health state, so subjects who have died keep being
    counted; their vital status is assumed known from a registry.
    """
    if not 0.0 <= p_part <= 1.0:
        raise ValueError(f"p_part must lie in [0, 1], got {p_part}")
    times = _check_times(visit_times)
    u = rng.uniforms(n * times.size).reshape(n, times.size)
    return VisitPlan(times, u < p_part, float(p_part))


def visit_histogram(plan: VisitPlan) -> np.ndarray:
    """Entry v counts the subjects with exactly v visits (v = 0..K)."""
    return np.bincount(plan.mask.sum(axis=1), minlength=plan.mask.shape[1] + 1)


def aggregate_acs(trajectories, plan: VisitPlan) -> AcsTable:
    pop = as_population(trajectories)
    if len(pop) != plan.n_subjects:
        raise ValueError(f"{len(pop)} trajectories for a plan of {plan.n_subjects} subjects")
    if plan.visit_times.size and plan.visit_times[-1] > pop.horizon:
        raise ValueError("visit times extend past the simulation horizon")
    counts = np.zeros((plan.visit_times.size, 3), dtype=np.int64)
    for k, t in enumerate(plan.visit_times):
        states = pop.states_at(t)[plan.mask[:, k]]
        counts[k] = np.bincount(states, minlength=3)
    return AcsTable(plan.visit_times.copy(), counts)


def observed_fractions(table: AcsTable) -> np.ndarray:
    """Per-visit state fractions, shape (K, 3)."""
    totals = table.totals
    zero = np.flatnonzero(totals == 0)
    if zero.size:
        raise ZeroTotalError(f"no participants at visit time(s) {table.visit_times[zero].tolist()}")
    return table.counts / totals[:, None]


def simulate_study(theta, n: int, visit_times=PAPER_VISIT_TIMES, p_part: float = 0.5, seed: int = 0):
    """Population, visit plan and ACS table for one study run.

    The population uses child stream 0 of ``seed`` and the plan child stream 1.
    """
    times = _check_times(visit_times)
    pop = simulate_population(n, theta, float(times[-1]), derive_seed(seed, 0))
    plan = draw_visit_plan(n, times, p_part, RngStream(derive_seed(seed, 1)))
    return pop, plan, aggregate_acs(pop, plan)


__all__ = [
    "AcsTable",
    "PAPER_VISIT_TIMES",
    "Population",
    "STATE_LABELS",
    "VisitPlan",
    "ZeroTotalError",
    "aggregate_acs",
    "draw_visit_plan",
    "observed_fractions",
    "simulate_study",
    "visit_histogram",
]

"""Least-squares and multinomial maximum-likelihood estimation of theta."""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .ode import DEFAULT_STEP, grid_indices, model_fractions
from .optim import nelder_mead
from .rates import RateModel, ThetaParams, as_rate_model
from .sampling import AcsTable, observed_fractions

DEFAULT_INITIAL = ThetaParams(40.0, 1e-3, 1.5)


class Objective(str, enum.Enum):
    LS = "LS"
    ML = "ML"


@dataclass(frozen=True)
class FitOptions:
    tol: Optional[float] = None  # spread tolerance; None -> 1e-10 (LS) or 1e-8 (ML)
    max_evals: int = 5000
    step: float = DEFAULT_STEP
    include_constants: bool = True  # factorial terms of the log-likelihood
    penalty_weight: float = 1.0  # per squared year of theta1 outside the window

    def tolerance(self, kind: Objective) -> float:
        if self.tol is not None:
            return self.tol
        return 1e-10 if kind is Objective.LS else 1e-8


@dataclass(frozen=True)
class EstimationResult:
    """Outcome of ``fit``.

    ``objective_value`` is the minimized quantity at ``theta_hat``: the sum of
    squares for LS, the negative log-likelihood for ML.
    """

    theta_hat: ThetaParams
    objective_value: float
    objective_kind: Objective
    n_evaluations: int
    converged: bool
    initial_theta: ThetaParams
    best_history: list = field(default_factory=list, repr=False, compare=False)


def _packed(theta1: float, theta2: float, theta3: float) -> np.ndarray:
    return RateModel(onset=theta1, slope=theta2, ratio=theta3).packed()


def _visit_index(visit_times, step: float) -> np.ndarray:
    times = np.asarray(visit_times, dtype=float)
    if times.size == 0 or np.any(np.diff(times) <= 0):
        raise ValueError("visit_times must be non-empty and strictly increasing")
    return grid_indices(times, 0.0, step)


def _ls_value(packed, idx, obs, step) -> float:
    model = model_fractions(packed, idx, step)
    return float(np.sum((model - obs) ** 2))


def ls_objective(theta, fractions, visit_times, step: float = DEFAULT_STEP) -> float:
    """Sum over visits and states of squared differences between model and observed fractions.

    The model starts from (1, 0, 0) at t=0.
    """
    obs = np.asarray(fractions, dtype=float).reshape(-1, 3)
    idx = _visit_index(visit_times, step)
    if obs.shape[0] != idx.size:
        raise ValueError(f"{obs.shape[0]} observed rows for {idx.size} visit times")
    return _ls_value(as_rate_model(theta).packed(), idx, obs, step)


def _log_factorial(x):
    return np.array([math.lgamma(v + 1.0) for v in np.ravel(x)]).reshape(np.shape(x))


class _Likelihood:
    """Multinomial log-likelihood with the data-only terms precomputed."""

    def __init__(self, counts, include_constants: bool = True):
        counts = np.asarray(counts)
        totals = counts.sum(axis=1)
        if np.any(counts < 0):
            raise ValueError("counts must be nonnegative")
        if np.any(totals <= 0):
            raise ValueError("every visit needs a positive total")
        self.counts = counts.astype(float)
        self.positive = self.counts > 0
        self.constant = 0.0
        if include_constants:
            self.constant = float(np.sum(_log_factorial(totals)) - np.sum(_log_factorial(counts)))

    def __call__(self, model: np.ndarray) -> float:
        p = model[self.positive]
        if np.any(p <= 0.0) or not np.all(np.isfinite(p)):
            return -math.inf
        return self.constant + float(np.sum(self.counts[self.positive] * np.log(p)))


def log_likelihood(
    theta, table: AcsTable, step: float = DEFAULT_STEP, include_constants: bool = True
) -> float:
    """Independent-multinomial log-likelihood of the ACS counts.

    Zero counts contribute nothing whatever the model probability; a positive
    count on a state with model probability 0 gives -inf.
    """
    lik = _Likelihood(table.counts, include_constants)
    idx = _visit_index(table.visit_times, step)
    return lik(model_fractions(as_rate_model(theta).packed(), idx, step))


def multinomial_log_likelihood(counts, probabilities, include_constants: bool = True) -> float:
    """Sum over rows of log multinomial pmf(counts[k]; totals[k], probabilities[k])."""
    probs = np.asarray(probabilities, dtype=float)
    counts = np.asarray(counts)
    if probs.shape != counts.shape:
        raise ValueError("counts and probabilities differ in shape")
    return _Likelihood(counts, include_constants)(probs)


def _to_theta(z, window) -> ThetaParams:
    return ThetaParams(float(np.clip(z[0], *window)), float(np.exp(z[1])), float(np.exp(z[2])))


def _minimize(kind, raw, visit_times, initial, options) -> EstimationResult:
    if initial.theta2 <= 0:
        raise ValueError("initial theta2 must be positive")
    window = (min(0.0, float(visit_times[0])), float(visit_times[-1]))

    def objective(z):
        t1 = min(max(z[0], window[0]), window[1])
        try:
            value = raw(_packed(t1, math.exp(z[1]), math.exp(z[2])))
        except OverflowError:
            return math.inf
        if math.isnan(value):
            return math.inf
        return value + options.penalty_weight * (z[0] - t1) ** 2

    z0 = np.array([initial.theta1, math.log(initial.theta2), math.log(initial.theta3)])
    with np.errstate(over="ignore", invalid="ignore"):
        res = nelder_mead(objective, z0, tol=options.tolerance(kind), max_evals=options.max_evals)
        theta_hat = _to_theta(res.x, window)
        value = raw(_packed(*theta_hat.as_tuple()))
    return EstimationResult(
        theta_hat=theta_hat,
        objective_value=value,
        objective_kind=kind,
        n_evaluations=res.n_evaluations,
        converged=res.converged and math.isfinite(value),
        initial_theta=initial,
        best_history=res.best_history,
    )


def fit(
    kind,
    data: AcsTable,
    initial: ThetaParams = DEFAULT_INITIAL,
    options: FitOptions = FitOptions(),
) -> EstimationResult:
    """Estimate theta by Nelder-Mead over (theta1, log theta2, log theta3).

    theta1 is clamped to the observation window inside the objective, with a
    quadratic penalty on the excess. LS fits the observed fractions
    counts / totals; ML maximizes the multinomial log-likelihood.
    """
    kind = Objective(kind)
    step = options.step
    idx = _visit_index(data.visit_times, step)
    if kind is Objective.LS:
        obs = observed_fractions(data)

        def raw(packed):
            return _ls_value(packed, idx, obs, step)

    else:
        lik = _Likelihood(data.counts, options.include_constants)

        def raw(packed):
            return -lik(model_fractions(packed, idx, step))

    return _minimize(kind, raw, data.visit_times, initial, options)


def fit_fractions(
    fractions,
    visit_times,
    initial: ThetaParams = DEFAULT_INITIAL,
    options: FitOptions = FitOptions(),
) -> EstimationResult:
    """LS fit directly on a (K, 3) array of fractions."""
    step = options.step
    idx = _visit_index(visit_times, step)
    obs = np.asarray(fractions, dtype=float).reshape(-1, 3)
    if obs.shape[0] != idx.size:
        raise ValueError(f"{obs.shape[0]} observed rows for {idx.size} visit times")

    def raw(packed):
        return _ls_value(packed, idx, obs, step)

    return _minimize(Objective.LS, raw, np.asarray(visit_times, dtype=float), initial, options)


def ml_start(table: AcsTable, theta: ThetaParams) -> ThetaParams:
    """Move theta1 below the first visit with diseased subjects.

    With theta1 at or past that visit the model gives p2 = 0 there, a positive
    count has probability zero, and the likelihood cannot be evaluated.
    """
    sick = np.flatnonzero(table.counts[:, 1] > 0)
    if sick.size == 0:
        return theta
    k = sick[0]
    t_first = float(table.visit_times[k])
    if theta.theta1 < t_first:
        return theta
    prev = float(table.visit_times[k - 1]) if k > 0 else 0.0
    return ThetaParams(0.5 * (prev + t_first), theta.theta2, theta.theta3)


def fit_both(
    data: AcsTable, initial: ThetaParams = DEFAULT_INITIAL, options: FitOptions = FitOptions()
) -> tuple[EstimationResult, EstimationResult]:
    """LS fit from ``initial``, then ML started from the LS estimate."""
    ls = fit(Objective.LS, data, initial, options)
    ml = fit(Objective.ML, data, ml_start(data, ls.theta_hat), options)
    return ls, ml

"""Parametric bootstrap that re-creates the study's visit schema in every replicate."""

from __future__ import annotations

import logging
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from .estimate import DEFAULT_INITIAL, FitOptions, Objective, fit, ml_start
from .microsim import simulate_population
from .rates import ThetaParams
from .rng import RngStream, derive_seed
from .sampling import VisitPlan, aggregate_acs, draw_visit_plan

log = logging.getLogger(__name__)

QUANTILE_LEVELS = (0.025, 0.5, 0.975)


@dataclass(frozen=True)
class BootstrapRun:
    b_index: int
    seed: int
    theta_ls: Optional[ThetaParams]
    theta_ml: Optional[ThetaParams]
    ls_converged: bool
    ml_converged: bool
    error: Optional[str] = None

    def estimate(self, kind) -> Optional[ThetaParams]:
        return self.theta_ls if Objective(kind) is Objective.LS else self.theta_ml

    def converged(self, kind) -> bool:
        return self.ls_converged if Objective(kind) is Objective.LS else self.ml_converged


@dataclass(frozen=True)
class QuantileSummary:
    median: np.ndarray  # one entry per theta component
    q025: np.ndarray
    q975: np.ndarray
    B: int
    n_converged: int


def replicate_seed(master_seed: int, b: int) -> int:
    return derive_seed(master_seed, b)


def _one_replicate(args) -> BootstrapRun:
    b, seed, theta_star, n, plan_template, fixed_mask, initial, options = args
    ls = ml = None
    ls_ok = ml_ok = False
    try:
        times = plan_template.visit_times
        pop = simulate_population(n, theta_star, float(times[-1]), derive_seed(seed, 0))
        if fixed_mask:
            plan = plan_template
        else:
            plan = draw_visit_plan(n, times, plan_template.p_part, RngStream(derive_seed(seed, 1)))
        table = aggregate_acs(pop, plan)
        ls_fit = fit(Objective.LS, table, initial, options)
        ls, ls_ok = ls_fit.theta_hat, ls_fit.converged
        ml_fit = fit(Objective.ML, table, ml_start(table, ls_fit.theta_hat), options)
        ml, ml_ok = ml_fit.theta_hat, ml_fit.converged
    except (ValueError, ArithmeticError) as exc:
        return BootstrapRun(b, seed, ls, ml, ls_ok, False, error=f"{type(exc).__name__}: {exc}")
    return BootstrapRun(b, seed, ls, ml, ls_ok, ml_ok)


def run_bootstrap(
    theta_star: ThetaParams,
    n: int,
    plan_template: VisitPlan,
    B: int,
    master_seed: int,
    *,
    fixed_mask: bool = False,
    workers: int = 1,
    initial: ThetaParams = DEFAULT_INITIAL,
    options: FitOptions = FitOptions(),
) -> list[BootstrapRun]:
    """B replicates, each with a fresh population simulated at ``theta_star``.

    By default every replicate draws a new participation mask with the
    template's visit times and participation probability; ``fixed_mask``
    reuses the template's realized mask instead. Replicate b is keyed by child
    stream b of ``master_seed``, so the result does not depend on ``workers``.
    Each replicate is fitted by LS from ``initial`` and by ML started at its
    LS estimate.
    """
    if B < 1:
        raise ValueError(f"B must be >= 1, got {B}")
    if not fixed_mask and plan_template.p_part is None:
        raise ValueError("plan_template carries no participation probability; use fixed_mask")
    if fixed_mask and plan_template.n_subjects != n:
        raise ValueError("fixed mask has a different number of subjects than n")
    jobs = [
        (b, replicate_seed(master_seed, b), theta_star, n, plan_template, fixed_mask, initial, options)
        for b in range(B)
    ]
    if workers <= 1:
        runs = [_one_replicate(job) for job in jobs]
    else:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            runs = list(pool.map(_one_replicate, jobs, chunksize=max(1, B // (8 * workers))))
    failed = sum(r.error is not None for r in runs)
    if failed:
        log.warning("%d of %d bootstrap replicates failed", failed, B)
    return runs


def quantile_summary(runs: Sequence[BootstrapRun], which) -> QuantileSummary:
    """Empirical 2.5/50/97.5% quantiles per component over converged runs.

    Quantiles interpolate linearly between order statistics.
    """
    kind = Objective(which)
    values = np.array([run.estimate(kind).as_tuple() for run in runs if run.converged(kind)])
    if values.size == 0:
        raise ValueError(f"no converged {kind.value} replicates among {len(runs)}")
    q = np.quantile(values, QUANTILE_LEVELS, axis=0, method="linear")
    return QuantileSummary(median=q[1], q025=q[0], q975=q[2], B=len(runs), n_converged=len(values))


def band_contains(summary: QuantileSummary, theta: ThetaParams) -> np.ndarray:
    t = np.array(theta.as_tuple())
    return (summary.q025 <= t) & (t <= summary.q975)


__all__ = [
    "BootstrapRun",
    "QuantileSummary",
    "band_contains",
    "quantile_summary",
    "replicate_seed",
    "run_bootstrap",
]

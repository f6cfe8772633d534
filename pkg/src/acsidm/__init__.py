"""Illness-death model: simulation of aggregated current status data and
estimation of the incidence rate and mortality rate ratio."""

from ._accel import backend_name
from .bootstrap import BootstrapRun, QuantileSummary, quantile_summary, run_bootstrap
from .estimate import (
    DEFAULT_INITIAL,
    EstimationResult,
    FitOptions,
    Objective,
    fit,
    fit_both,
    fit_fractions,
    log_likelihood,
    ls_objective,
    ml_start,
    multinomial_log_likelihood,
)
from .microsim import Population, State, Trajectory, simulate_population, simulate_subject, state_at
from .ode import INITIAL_STATE, SolutionPath, StateFractions, solve_idm, solve_prevalence
from .rates import (
    THETA_TRUE,
    RateModel,
    ThetaParams,
    background_mortality,
    diseased_mortality,
    incidence_rate,
    system_matrix,
)
from .rng import RngStream
from .sampling import (
    PAPER_VISIT_TIMES,
    AcsTable,
    VisitPlan,
    aggregate_acs,
    draw_visit_plan,
    observed_fractions,
    simulate_study,
    visit_histogram,
)

__version__ = "0.1.0"

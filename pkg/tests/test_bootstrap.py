import numpy as np
import pytest

from acsidm.bootstrap import BootstrapRun, band_contains, quantile_summary, replicate_seed, run_bootstrap
from acsidm.rates import THETA_TRUE, ThetaParams
from acsidm.rng import RngStream
from acsidm.sampling import draw_visit_plan

from .conftest import VISIT_TIMES


def _runs(values, converged=True):
    return [
        BootstrapRun(b, b, ThetaParams(*v), ThetaParams(*v), converged, converged)
        for b, v in enumerate(values)
    ]


def _template(n, p_part=0.5, seed=3):
    return draw_visit_plan(n, VISIT_TIMES, p_part, RngStream(seed))


def test_constant_runs_collapse_quantiles():
    s = quantile_summary(_runs([(30, 5e-4, 2.0)] * 7), "LS")
    for q in (s.q025, s.median, s.q975):
        np.testing.assert_array_equal(q, [30, 5e-4, 2.0])
    assert s.B == 7 and s.n_converged == 7


def test_odd_count_median():
    s = quantile_summary(_runs([(30, 5e-4, k) for k in (3.0, 1.0, 2.0)]), "ML")
    assert s.median[2] == 2.0


def test_uniform_lower_quantile():
    u = RngStream(2024).uniforms(1000)
    s = quantile_summary(_runs([(30, 5e-4, x) for x in u]), "LS")
    assert abs(s.q025[2] - 0.025) < 0.02
    assert s.q025[2] <= s.median[2] <= s.q975[2]


def test_non_converged_runs_excluded():
    runs = _runs([(30, 5e-4, 2.0)] * 3) + _runs([(99, 1e-2, 9.0)], converged=False)
    s = quantile_summary(runs, "LS")
    assert s.B == 4 and s.n_converged == 3
    assert s.q975[0] == 30


def test_no_converged_runs_is_an_error():
    with pytest.raises(ValueError, match="no converged"):
        quantile_summary(_runs([(30, 5e-4, 2.0)], converged=False), "LS")


def test_band_contains():
    s = quantile_summary(_runs([(30, 5e-4, 2.0), (34, 7e-4, 2.4)]), "LS")
    assert band_contains(s, ThetaParams(32, 6e-4, 2.1)).all()
    assert not band_contains(s, ThetaParams(40, 6e-4, 2.1))[0]


def test_single_replicate_deterministic():
    a = run_bootstrap(THETA_TRUE, 300, _template(300), 1, master_seed=9)
    b = run_bootstrap(THETA_TRUE, 300, _template(300), 1, master_seed=9)
    assert len(a) == 1 and a == b
    assert a[0].seed == replicate_seed(9, 0)
    assert a[0].ls_converged and a[0].ml_converged


def test_replicates_vary_with_index():
    runs = run_bootstrap(THETA_TRUE, 300, _template(300), 3, master_seed=9)
    assert len({r.seed for r in runs}) == 3
    assert len({r.theta_ls for r in runs}) == 3


def test_parallel_matches_sequential():
    seq = run_bootstrap(THETA_TRUE, 300, _template(300), 4, master_seed=5, workers=1)
    par = run_bootstrap(THETA_TRUE, 300, _template(300), 4, master_seed=5, workers=4)
    assert seq == par


def test_fixed_mask_mode():
    plan = _template(300)
    runs = run_bootstrap(THETA_TRUE, 300, plan, 2, master_seed=5, fixed_mask=True)
    redrawn = run_bootstrap(THETA_TRUE, 300, plan, 2, master_seed=5)
    assert runs != redrawn
    with pytest.raises(ValueError):
        run_bootstrap(THETA_TRUE, 301, plan, 2, master_seed=5, fixed_mask=True)


def test_rejects_empty_batch():
    with pytest.raises(ValueError):
        run_bootstrap(THETA_TRUE, 300, _template(300), 0, master_seed=5)


def test_failed_replicate_is_flagged_not_raised():
    # nobody participates, so every visit has a zero total
    bad = run_bootstrap(THETA_TRUE, 50, _template(50, p_part=0.0), 2, master_seed=1)
    assert all(r.error is not None for r in bad)
    assert not any(r.ls_converged or r.ml_converged for r in bad)


def test_ml_bands_not_wider_than_ls():
    runs = run_bootstrap(THETA_TRUE, 600, _template(600), 150, master_seed=20261018)
    ls = quantile_summary(runs, "LS")
    ml = quantile_summary(runs, "ML")
    assert ls.n_converged >= 145 and ml.n_converged >= 145
    assert ((ml.q975 - ml.q025) <= 1.1 * (ls.q975 - ls.q025)).all()


@pytest.mark.slow
def test_band_coverage_at_generator():
    hits = np.zeros(3, dtype=int)
    for m in range(100):
        runs = run_bootstrap(THETA_TRUE, 600, _template(600, seed=m), 199, master_seed=1000 + m)
        hits += band_contains(quantile_summary(runs, "LS"), THETA_TRUE)
    assert (hits >= 88).all(), hits

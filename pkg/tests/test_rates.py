import math

import numpy as np
import pytest

from acsidm.rates import (
    THETA_TRUE,
    RateModel,
    ThetaParams,
    background_mortality,
    diseased_mortality,
    incidence_rate,
    system_matrix,
)


def test_incidence_at_kink_and_below_onset():
    assert incidence_rate(THETA_TRUE, 30.0) == 0.0
    assert incidence_rate(THETA_TRUE, 20.0) == 0.0


def test_incidence_at_fifty():
    # max(0, 50 - 30) / 2000
    assert incidence_rate(THETA_TRUE, 50.0) == pytest.approx(0.01, rel=1e-15)


@pytest.mark.parametrize(
    "t, expected",
    [(0.0, math.exp(-10.7)), (107.0, 1.0), (80.0, math.exp(-2.7))],
)
def test_background_mortality(t, expected):
    assert background_mortality(t) == pytest.approx(expected, rel=1e-14)


def test_background_mortality_values_quoted():
    assert background_mortality(0.0) == pytest.approx(2.2545e-5, rel=1e-4)
    assert background_mortality(80.0) == pytest.approx(0.06721, rel=1e-4)


def test_diseased_mortality():
    assert diseased_mortality(ThetaParams(30, 5e-4, 1.0), 40.0) == background_mortality(40.0)
    assert diseased_mortality(ThetaParams(30, 5e-4, 2.0), 0.0) == pytest.approx(2 * math.exp(-10.7), rel=1e-15)
    t = np.linspace(0, 100, 11)
    np.testing.assert_allclose(diseased_mortality(THETA_TRUE, t), np.exp(-10 + 0.1 * t), rtol=1e-13)


def test_system_matrix_layout():
    a = system_matrix(THETA_TRUE, 50.0)
    c12, c13 = 0.01, math.exp(-10.7 + 5.0)
    c23 = math.exp(0.7) * c13
    assert a[1, 0] == pytest.approx(0.01, rel=1e-15)
    expected = np.array([[-c12 - c13, 0, 0], [c12, -c23, 0], [c13, c23, 0]])
    np.testing.assert_allclose(a, expected, rtol=1e-14)


def test_zero_model_gives_zero_matrix():
    assert not system_matrix(RateModel.zero(), 12.3).any()


@pytest.mark.parametrize("t", [0.0, 29.9, 30.0, 55.5, 100.0])
def test_columns_sum_to_zero(t):
    a = system_matrix(THETA_TRUE, t)
    assert np.all(np.abs(a.sum(axis=0)) <= 4 * np.finfo(float).eps * np.abs(a).max())


def test_theta_validation():
    with pytest.raises(ValueError):
        ThetaParams(30, -1e-4, 2.0)
    with pytest.raises(ValueError):
        ThetaParams(30, 1e-4, 0.0)
    with pytest.raises(ValueError):
        ThetaParams(float("nan"), 1e-4, 1.0)


def test_true_theta_constant():
    assert THETA_TRUE.as_tuple() == (30.0, 0.0005, math.exp(0.7))


def test_rate_model_matches_named_functions():
    m = RateModel.from_theta(THETA_TRUE)
    t = np.linspace(0, 100, 37)
    np.testing.assert_array_equal(m.c12(t), incidence_rate(THETA_TRUE, t))
    np.testing.assert_allclose(m.c13(t), background_mortality(t), rtol=1e-14)
    np.testing.assert_allclose(m.c23(t) / m.c13(t), THETA_TRUE.theta3, rtol=1e-15)


def test_constant_model():
    m = RateModel.constant(0.02, 0.01, 0.05)
    assert m.c12(7.0) == 0.02
    assert m.c13(7.0) == pytest.approx(0.01)
    assert m.c23(7.0) == pytest.approx(0.05)

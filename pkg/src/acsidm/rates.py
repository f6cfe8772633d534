"""Transition rates of the chronic-disease illness-death model.

States are numbered 1 (non-diseased), 2 (diseased) and 3 (dead). The rates
are ``c12`` (incidence), ``c13`` (mortality of the non-diseased) and ``c23``
(mortality of the diseased), all per year and functions of age ``t``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

# Gompertz background mortality c13(t) = exp(GOMPERTZ_INTERCEPT + GOMPERTZ_SLOPE * t)
GOMPERTZ_INTERCEPT = -10.7
GOMPERTZ_SLOPE = 0.1


@dataclass(frozen=True)
class ThetaParams:
    """Unknown parameter vector of the rate family.

    theta1 is the onset age (years), theta2 the slope of the incidence rate
    (per year squared) and theta3 the mortality rate ratio c23 / c13.
    """

    theta1: float
    theta2: float
    theta3: float

    def __post_init__(self):
        for name in ("theta1", "theta2", "theta3"):
            if not math.isfinite(getattr(self, name)):
                raise ValueError(f"{name} must be finite, got {getattr(self, name)!r}")
        if self.theta2 < 0:
            raise ValueError(f"theta2 must be >= 0, got {self.theta2!r}")
        if self.theta3 <= 0:
            raise ValueError(f"theta3 must be > 0, got {self.theta3!r}")

    def as_tuple(self) -> tuple[float, float, float]:
        return (self.theta1, self.theta2, self.theta3)


THETA_TRUE = ThetaParams(30.0, 1.0 / 2000.0, math.exp(0.7))


def incidence_rate(theta: ThetaParams, t):
    """c12(t) = theta2 * max(0, t - theta1)."""
    return theta.theta2 * np.maximum(0.0, np.subtract(t, theta.theta1))


def background_mortality(t):
    """Known mortality of the non-diseased, exp(-10.7 + 0.1 t)."""
    return np.exp(GOMPERTZ_INTERCEPT + GOMPERTZ_SLOPE * np.asarray(t, dtype=float))


def diseased_mortality(theta: ThetaParams, t):
    return theta.theta3 * background_mortality(t)


@dataclass(frozen=True)
class RateModel:
    """Evaluator for the three rates.

    The family is

        c12(t) = level + slope * max(0, t - onset)
        c13(t) = mort_scale * exp(mort_growth * t)
        c23(t) = ratio * c13(t)

    ``from_theta`` gives the parametric family used throughout; ``constant``
    and ``zero`` exist for checks against closed-form solutions.
    """

    onset: float
    slope: float
    ratio: float
    level: float = 0.0
    mort_scale: float = math.exp(GOMPERTZ_INTERCEPT)
    mort_growth: float = GOMPERTZ_SLOPE

    def __post_init__(self):
        if self.slope < 0 or self.level < 0 or self.mort_scale < 0 or self.ratio < 0:
            raise ValueError("rate coefficients must be nonnegative")

    @classmethod
    def from_theta(cls, theta: ThetaParams) -> RateModel:
        return cls(onset=theta.theta1, slope=theta.theta2, ratio=theta.theta3)

    @classmethod
    def constant(cls, c12: float, c13: float, c23: float) -> RateModel:
        if c13 <= 0:
            raise ValueError("constant model needs c13 > 0 to express c23 as a ratio")
        return cls(onset=0.0, slope=0.0, ratio=c23 / c13, level=c12, mort_scale=c13, mort_growth=0.0)

    @classmethod
    def zero(cls) -> RateModel:
        return cls(onset=0.0, slope=0.0, ratio=0.0, level=0.0, mort_scale=0.0, mort_growth=0.0)

    def c12(self, t):
        return self.level + self.slope * np.maximum(0.0, np.subtract(t, self.onset))

    def c13(self, t):
        return self.mort_scale * np.exp(self.mort_growth * np.asarray(t, dtype=float))

    def c23(self, t):
        return self.ratio * self.c13(t)

    def rates(self, t):
        c13 = self.c13(t)
        return self.c12(t), c13, self.ratio * c13

    def packed(self) -> np.ndarray:
        """Coefficients in the layout the compiled kernels expect."""
        return np.array(
            [self.onset, self.slope, self.level, self.mort_scale, self.mort_growth, self.ratio],
            dtype=np.float64,
        )


def as_rate_model(model) -> RateModel:
    if isinstance(model, RateModel):
        return model
    if isinstance(model, ThetaParams):
        return RateModel.from_theta(model)
    raise TypeError(f"expected ThetaParams or RateModel, got {type(model).__name__}")


def system_matrix(theta, t: float) -> np.ndarray:
    """Generator matrix A(t) of p' = A(t) p; every column sums to zero."""
    c12, c13, c23 = as_rate_model(theta).rates(float(t))
    c12, c13, c23 = float(c12), float(c13), float(c23)
    return np.array(
        [
            [-c12 - c13, 0.0, 0.0],
            [c12, -c23, 0.0],
            [c13, c23, 0.0],
        ]
    )

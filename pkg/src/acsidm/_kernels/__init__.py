"""Hot loops, each with a numba build and a pure-numpy build.

The names without suffix point at whichever build the environment selects
(see ``acsidm._accel``).
"""

from .._accel import USE_NUMBA
from . import microsim, ode

if USE_NUMBA:
    rk4_idm = ode.rk4_idm_numba
    rk4_prevalence = ode.rk4_prevalence_numba
    simulate = microsim.simulate_numba
else:
    rk4_idm = ode.rk4_idm_numpy
    rk4_prevalence = ode.rk4_prevalence_numpy
    simulate = microsim.simulate_numpy

__all__ = ["rk4_idm", "rk4_prevalence", "simulate", "ode", "microsim"]

import importlib.util
import os
import subprocess
import sys

import numpy as np
import pytest

from acsidm._accel import NUMBA_AVAILABLE, backend_name
from acsidm._kernels import microsim as km
from acsidm._kernels import ode as ko
from acsidm.rates import THETA_TRUE, RateModel
from acsidm.rng import RngStream

needs_numba = pytest.mark.skipif(not NUMBA_AVAILABLE, reason="numba not installed")

MODELS = [
    RateModel.from_theta(THETA_TRUE),
    RateModel(onset=-5.0, slope=2e-3, ratio=4.0, level=1e-3),
    RateModel.constant(0.02, 0.01, 0.03),
    RateModel(onset=10.0, slope=1e-3, ratio=1.0, mort_growth=0.0, mort_scale=0.005),
]


@needs_numba
@pytest.mark.parametrize("model", MODELS)
def test_rk4_backends_agree(model):
    r = model.packed()
    p0 = np.array([0.9, 0.1, 0.0])
    a = ko.rk4_idm_numba(r, p0, 0.0, 0.1, 1000)
    b = ko.rk4_idm_numpy(r, p0, 0.0, 0.1, 1000)
    np.testing.assert_allclose(a, b, rtol=0, atol=1e-13)


@needs_numba
@pytest.mark.parametrize("model", MODELS)
def test_prevalence_backends_agree(model):
    r = model.packed()
    a = ko.rk4_prevalence_numba(r, 0.05, 0.0, 0.1, 1000)
    b = ko.rk4_prevalence_numpy(r, 0.05, 0.0, 0.1, 1000)
    np.testing.assert_allclose(a, b, rtol=0, atol=1e-13)


@needs_numba
@pytest.mark.parametrize("model", MODELS)
def test_microsim_backends_agree(model):
    keys = RngStream(123).spawn_keys(5000)
    o1, d1, s1 = km.simulate_numba(model.packed(), 100.0, keys)
    o2, d2, s2 = km.simulate_numpy(model.packed(), 100.0, keys)
    assert s1 == s2 == km.OK
    np.testing.assert_array_equal(np.isnan(o1), np.isnan(o2))
    np.testing.assert_array_equal(np.isnan(d1), np.isnan(d2))
    np.testing.assert_allclose(o1, o2, rtol=0, atol=1e-9, equal_nan=True)
    np.testing.assert_allclose(d1, d2, rtol=0, atol=1e-9, equal_nan=True)


@needs_numba
def test_uniform_helpers_agree():
    keys = RngStream(5).spawn_keys(64)
    expected = km.uniforms_numpy(keys[:, None], np.arange(3, dtype=np.uint64)[None, :])
    got = np.array([[km._uniform(k, j) for j in range(3)] for k in keys])
    np.testing.assert_array_equal(got, expected)


def test_active_backend_name():
    assert backend_name() in {"numba", "numpy"}


SCRIPT = """
import numpy as np
from acsidm import _accel
from acsidm.ode import solve_idm
from acsidm.microsim import simulate_population
from acsidm.rates import THETA_TRUE
p = solve_idm(THETA_TRUE).values
pop = simulate_population(1000, THETA_TRUE, 100.0, seed=42)
np.save({path!r}, np.concatenate([p.ravel(), pop.onset, pop.death]))
print(_accel.backend_name())
"""


def _run(tmp_path, disable):
    path = str(tmp_path / f"out_{disable}.npy")
    env = dict(os.environ)
    env.pop("ACSIDM_DISABLE_NUMBA", None)
    if disable:
        env["ACSIDM_DISABLE_NUMBA"] = "1"
    proc = subprocess.run(
        [sys.executable, "-c", SCRIPT.format(path=path)], env=env, capture_output=True, text=True, check=True
    )
    return proc.stdout.strip(), np.load(path)


def test_env_flag_selects_numpy(tmp_path):
    name, fallback = _run(tmp_path, disable=True)
    assert name == "numpy"
    default_name, default = _run(tmp_path, disable=False)
    assert default_name == ("numba" if importlib.util.find_spec("numba") else "numpy")
    np.testing.assert_allclose(fallback, default, rtol=0, atol=1e-9, equal_nan=True)

"""Time the numba kernels against their pure-numpy fallbacks.

    python3 benchmarks/bench_kernels.py [--subjects 200000] [--repeat 5]
"""

import argparse
import timeit

import numpy as np

from acsidm._accel import NUMBA_AVAILABLE
from acsidm._kernels import microsim as km
from acsidm._kernels import ode as ko
from acsidm.rates import THETA_TRUE, RateModel
from acsidm.rng import RngStream


def best(fn, repeat, number):
    return min(timeit.repeat(fn, repeat=repeat, number=number)) / number


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--subjects", type=int, default=200_000)
    ap.add_argument("--repeat", type=int, default=5)
    args = ap.parse_args()

    r = RateModel.from_theta(THETA_TRUE).packed()
    p0 = np.array([1.0, 0.0, 0.0])
    keys = RngStream(1).spawn_keys(args.subjects)
    cases = {
        "rk4_idm (1000 steps)": (
            lambda: ko.rk4_idm_numba(r, p0, 0.0, 0.1, 1000),
            lambda: ko.rk4_idm_numpy(r, p0, 0.0, 0.1, 1000),
            200,
        ),
        "rk4_prevalence (1000 steps)": (
            lambda: ko.rk4_prevalence_numba(r, 0.0, 0.0, 0.1, 1000),
            lambda: ko.rk4_prevalence_numpy(r, 0.0, 0.0, 0.1, 1000),
            20,
        ),
        f"simulate ({args.subjects} subjects)": (
            lambda: km.simulate_numba(r, 100.0, keys),
            lambda: km.simulate_numpy(r, 100.0, keys),
            1,
        ),
    }
    print(f"{'kernel':<32}{'numba':>12}{'numpy':>12}{'ratio':>8}")
    for name, (fast, slow, number) in cases.items():
        t_slow = best(slow, args.repeat, number)
        if NUMBA_AVAILABLE:
            fast()  # compile
            t_fast = best(fast, args.repeat, number)
            print(f"{name:<32}{t_fast * 1e3:>10.3f}ms{t_slow * 1e3:>10.3f}ms{t_slow / t_fast:>8.1f}")
        else:
            print(f"{name:<32}{'n/a':>12}{t_slow * 1e3:>10.3f}ms{'':>8}")


if __name__ == "__main__":
    main()

"""Nelder-Mead simplex minimizer."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np


@dataclass
class SimplexResult:
    x: np.ndarray
    fun: float
    n_evaluations: int
    converged: bool
    best_history: list = field(default_factory=list)


def nelder_mead(
    fun,
    x0,
    *,
    tol: float,
    max_evals: int = 5000,
    initial_rel_step: float = 0.1,
    reflect: float = 1.0,
    expand: float = 2.0,
    contract: float = 0.5,
    shrink: float = 0.5,
) -> SimplexResult:
    """Minimize ``fun`` from ``x0``.

    The initial simplex moves each coordinate by ``initial_rel_step`` of its
    value (0.00025 absolute for zero coordinates). Converged means the spread
    max f - min f over the simplex vertices fell to ``tol`` or below before
    ``max_evals`` evaluations. ``fun`` may return +inf for infeasible points.
    """
    x0 = np.asarray(x0, dtype=float)
    dim = x0.size
    evals = 0

    def f(x):
        nonlocal evals
        evals += 1
        return float(fun(x))

    pts = [x0.copy()]
    for i in range(dim):
        x = x0.copy()
        x[i] = x[i] * (1.0 + initial_rel_step) if x[i] != 0.0 else 0.00025
        pts.append(x)
    sim = np.array(pts)
    fv = np.array([f(x) for x in sim])
    if not np.isfinite(fv[0]):
        raise ValueError(f"objective is not finite at the initial point {x0.tolist()}")

    history = []
    converged = False
    while True:
        order = np.argsort(fv, kind="stable")
        sim, fv = sim[order], fv[order]
        history.append(fv[0])
        if fv[-1] - fv[0] <= tol:
            converged = True
            break
        if evals >= max_evals:
            break

        centroid = sim[:-1].mean(axis=0)
        worst = sim[-1]
        xr = centroid + reflect * (centroid - worst)
        fr = f(xr)
        if fr < fv[0]:
            xe = centroid + expand * (centroid - worst)
            fe = f(xe)
            if fe < fr:
                sim[-1], fv[-1] = xe, fe
            else:
                sim[-1], fv[-1] = xr, fr
            continue
        if fr < fv[-2]:
            sim[-1], fv[-1] = xr, fr
            continue
        if fr < fv[-1]:
            xc = centroid + contract * (xr - centroid)
            fc = f(xc)
            if fc <= fr:
                sim[-1], fv[-1] = xc, fc
                continue
        else:
            xc = centroid + contract * (worst - centroid)
            fc = f(xc)
            if fc < fv[-1]:
                sim[-1], fv[-1] = xc, fc
                continue
        for i in range(1, dim + 1):
            sim[i] = sim[0] + shrink * (sim[i] - sim[0])
            fv[i] = f(sim[i])

    return SimplexResult(sim[0].copy(), float(fv[0]), evals, converged, history)

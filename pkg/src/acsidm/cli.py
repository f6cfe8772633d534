"""Command-line front end: ``acsidm simulate | estimate | bootstrap | report``.

Settings come from a flat ``key = value`` file (``--config``) overridden by
flags. Exit codes: 0 success, 2 usage/configuration error, 3 invalid data,
4 I/O error, 5 every bootstrap replicate failed.
"""

from __future__ import annotations

import argparse
import csv
import io
import math
import secrets
import sys
from dataclasses import dataclass, replace
from pathlib import Path
from typing import Optional

import numpy as np

from .bootstrap import quantile_summary, run_bootstrap
from .estimate import DEFAULT_INITIAL, FitOptions, Objective, fit, ml_start
from .ode import DEFAULT_STEP, solve_idm
from .rates import THETA_TRUE, ThetaParams
from .sampling import (
    PAPER_VISIT_TIMES,
    STATE_LABELS,
    AcsTable,
    VisitPlan,
    ZeroTotalError,
    observed_fractions,
    simulate_study,
    visit_histogram,
)

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_DATA = 3
EXIT_IO = 4
EXIT_ALL_FAILED = 5

PARAM_NAMES = ("theta1", "theta2", "theta3")


class ConfigError(ValueError):
    pass


class DataError(ValueError):
    pass


@dataclass
class RunConfig:
    theta: ThetaParams = THETA_TRUE  # generator for simulate, theta* for bootstrap
    initial: ThetaParams = DEFAULT_INITIAL
    n_subjects: int = 600
    visit_times: tuple = PAPER_VISIT_TIMES
    p_part: float = 0.5
    B: int = 1000
    seed: Optional[int] = None
    ode_step: float = DEFAULT_STEP
    objective: str = "both"
    workers: int = 1
    fixed_mask: bool = False
    plan: Optional[str] = None
    reference: Optional[ThetaParams] = None

    def kinds(self) -> list[Objective]:
        if self.objective == "both":
            return [Objective.LS, Objective.ML]
        return [Objective(self.objective)]


# --- config parsing ---------------------------------------------------------


def _parse_theta(text: str) -> ThetaParams:
    parts = [p for p in text.replace(" ", "").split(",") if p]
    if len(parts) != 3:
        raise ConfigError(f"expected three comma-separated values, got {text!r}")
    try:
        return ThetaParams(*(float(p) for p in parts))
    except ValueError as exc:
        raise ConfigError(f"invalid theta {text!r}: {exc}") from None


def _parse_times(text: str) -> tuple:
    try:
        times = tuple(float(p) for p in text.replace(" ", "").split(",") if p)
    except ValueError:
        raise ConfigError(f"invalid visit_times {text!r}") from None
    if not times or any(b <= a for a, b in zip(times, times[1:])):
        raise ConfigError("visit_times must be non-empty and strictly increasing")
    return times


def _parse_bool(text: str) -> bool:
    t = text.strip().lower()
    if t in {"1", "true", "yes", "on"}:
        return True
    if t in {"0", "false", "no", "off"}:
        return False
    raise ConfigError(f"invalid boolean {text!r}")


def _parse_seed(text) -> int:
    try:
        seed = int(str(text), 0)
    except ValueError:
        raise ConfigError(f"invalid seed {text!r}") from None
    if not 0 <= seed < 2**64:
        raise ConfigError("seed must be an unsigned 64-bit integer")
    return seed


_CONVERTERS = {
    "theta": _parse_theta,
    "initial": _parse_theta,
    "reference": _parse_theta,
    "n_subjects": int,
    "visit_times": _parse_times,
    "p_part": float,
    "B": int,
    "seed": _parse_seed,
    "ode_step": float,
    "objective": str,
    "workers": int,
    "fixed_mask": _parse_bool,
    "plan": str,
}
_ALIASES = {"theta_true": "theta", "theta_star": "theta", "theta_initial": "initial", "master_seed": "seed", "b": "B"}


def _apply(cfg: RunConfig, key: str, raw) -> RunConfig:
    key = _ALIASES.get(key, key)
    if key not in _CONVERTERS:
        raise ConfigError(f"unknown setting {key!r}")
    try:
        value = _CONVERTERS[key](raw) if isinstance(raw, str) else raw
    except ConfigError:
        raise
    except ValueError:
        raise ConfigError(f"invalid value for {key}: {raw!r}") from None
    return replace(cfg, **{key: value})


def load_config(path: Optional[str]) -> RunConfig:
    cfg = RunConfig()
    if path is None:
        return cfg
    text = Path(path).read_text(encoding="utf-8")
    for lineno, line in enumerate(text.splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"{path}:{lineno}: expected key = value")
        key, value = (s.strip() for s in line.split("=", 1))
        try:
            cfg = _apply(cfg, key, value)
        except ConfigError as exc:
            raise ConfigError(f"{path}:{lineno}: {exc}") from None
    return cfg


def _validate(cfg: RunConfig) -> RunConfig:
    if cfg.n_subjects < 1:
        raise ConfigError("n_subjects must be >= 1")
    if not 0.0 <= cfg.p_part <= 1.0:
        raise ConfigError("p_part must lie in [0, 1]")
    if cfg.B < 1:
        raise ConfigError("B must be >= 1")
    if not cfg.ode_step > 0:
        raise ConfigError("ode_step must be positive")
    if cfg.objective not in {"LS", "ML", "both"}:
        raise ConfigError("objective must be LS, ML or both")
    if cfg.workers < 1:
        raise ConfigError("workers must be >= 1")
    if cfg.visit_times[0] < 0:
        raise ConfigError("visit times must be >= 0")
    return cfg


# --- CSV formats ------------------------------------------------------------


def _fmt(x) -> str:
    if isinstance(x, (bool, np.bool_)):
        return "true" if x else "false"
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    x = float(x)
    if x.is_integer() and abs(x) < 1e15:
        return str(int(x))
    return repr(x)


def _write_csv(path: Path, header, rows) -> None:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        w.writerow([_fmt(v) if not isinstance(v, str) else v for v in row])
    path.write_text(buf.getvalue(), encoding="utf-8", newline="")


def write_acs_table(path: Path, table: AcsTable) -> None:
    """States as rows, visit times as columns, with a closing Sum row."""
    rows = [[label, *table.counts[:, j]] for j, label in enumerate(STATE_LABELS)]
    rows.append(["Sum", *table.totals])
    _write_csv(path, ["state", *(_fmt(t) for t in table.visit_times)], rows)


def _parse_count(cell: str, lineno: int, what: str) -> int:
    try:
        value = int(cell.strip())
    except ValueError:
        raise DataError(f"line {lineno}: {what}: {cell!r} is not an integer count") from None
    if value < 0:
        raise DataError(f"line {lineno}: {what}: negative count {value}")
    return value


def read_acs_table(path) -> AcsTable:
    """Parse an ACS table in either orientation (detected from the header).

    Rows-as-states files start with ``state``; transposed files start with
    ``time`` and carry one visit per row. The Sum row/column is optional but
    must agree with the state counts when present.
    """
    text = Path(path).read_text(encoding="utf-8")
    rows = [(i, r) for i, r in enumerate(csv.reader(io.StringIO(text)), 1) if any(c.strip() for c in r)]
    if not rows:
        raise DataError("empty ACS file")
    head_line, header = rows[0]
    key = header[0].strip().lower()
    labels = {s.lower(): j for j, s in enumerate(STATE_LABELS)}

    if key == "state":
        try:
            times = np.array([float(c) for c in header[1:]])
        except ValueError:
            raise DataError(f"line {head_line}: visit times in the header must be numbers") from None
        counts = np.full((times.size, 3), -1, dtype=np.int64)
        sums = None
        for lineno, row in rows[1:]:
            if len(row) != len(header):
                raise DataError(f"line {lineno}: expected {len(header)} fields, found {len(row)}")
            name = row[0].strip().lower()
            values = [_parse_count(c, lineno, f"t={_fmt(t)}") for c, t in zip(row[1:], times)]
            if name == "sum":
                sums = (lineno, values)
            elif name in labels:
                counts[:, labels[name]] = values
            else:
                raise DataError(f"line {lineno}: unknown state {row[0]!r}")
        if np.any(counts < 0):
            raise DataError("ACS file must contain rows Non-diseased, Diseased and Dead")
        if sums is not None:
            lineno, values = sums
            for t, s, total in zip(times, values, counts.sum(axis=1)):
                if s != total:
                    raise DataError(f"line {lineno}: Sum at t={_fmt(t)} is {s} but the states add to {total}")
    elif key == "time":
        cols = [c.strip().lower() for c in header[1:]]
        idx = {}
        for pos, name in enumerate(cols, 1):
            if name in labels:
                idx[labels[name]] = pos
            elif name == "sum":
                idx["sum"] = pos
            else:
                raise DataError(f"line {head_line}: unknown column {header[pos]!r}")
        if set(range(3)) - idx.keys():
            raise DataError(f"line {head_line}: columns Non-diseased, Diseased and Dead are required")
        times_l, counts_l = [], []
        for lineno, row in rows[1:]:
            if len(row) != len(header):
                raise DataError(f"line {lineno}: expected {len(header)} fields, found {len(row)}")
            try:
                t = float(row[0])
            except ValueError:
                raise DataError(f"line {lineno}: time {row[0]!r} is not a number") from None
            c = [_parse_count(row[idx[j]], lineno, STATE_LABELS[j]) for j in range(3)]
            if "sum" in idx:
                s = _parse_count(row[idx["sum"]], lineno, "Sum")
                if s != sum(c):
                    raise DataError(f"line {lineno}: Sum at t={_fmt(t)} is {s} but the states add to {sum(c)}")
            times_l.append(t)
            counts_l.append(c)
        times = np.array(times_l)
        counts = np.array(counts_l, dtype=np.int64).reshape(-1, 3)
    else:
        raise DataError(f"line {head_line}: header must start with 'state' or 'time'")

    if times.size == 0 or np.any(np.diff(times) <= 0):
        raise DataError("visit times must be strictly increasing")
    return AcsTable(times, counts)


def write_visit_plan(path: Path, plan: VisitPlan) -> None:
    rows = ([i, *row.astype(int)] for i, row in enumerate(plan.mask))
    _write_csv(path, ["subject", *(_fmt(t) for t in plan.visit_times)], rows)


def read_visit_plan(path, p_part: Optional[float] = None) -> VisitPlan:
    with open(path, encoding="utf-8", newline="") as fh:
        rows = list(csv.reader(fh))
    try:
        times = np.array([float(c) for c in rows[0][1:]])
        mask = np.array([[int(c) for c in r[1:]] for r in rows[1:] if r], dtype=np.int64)
    except (ValueError, IndexError):
        raise DataError(f"{path}: malformed visit plan") from None
    if mask.ndim != 2 or mask.shape[1] != times.size or not np.isin(mask, (0, 1)).all():
        raise DataError(f"{path}: visit plan must be a 0/1 matrix with one column per visit")
    return VisitPlan(times, mask.astype(bool), p_part)


# --- commands ---------------------------------------------------------------


def _seed(cfg: RunConfig) -> int:
    if cfg.seed is None:
        cfg.seed = secrets.randbits(64)
    print(f"seed: {cfg.seed}")
    return cfg.seed


def cmd_simulate(cfg: RunConfig, out: Path) -> int:
    seed = _seed(cfg)
    _, plan, table = simulate_study(cfg.theta, cfg.n_subjects, cfg.visit_times, cfg.p_part, seed)
    write_acs_table(out / "acs.csv", table)
    hist = visit_histogram(plan)
    _write_csv(out / "visits.csv", ["visits", *range(hist.size), "Sum"], [["subjects", *hist, hist.sum()]])
    write_visit_plan(out / "visit_plan.csv", plan)
    print(f"wrote {out / 'acs.csv'}, {out / 'visits.csv'}, {out / 'visit_plan.csv'}")
    return EXIT_OK


def _dense_times(table: AcsTable, step: float) -> np.ndarray:
    # every whole year on the solver grid up to the last visit
    n_per_year = round(1.0 / step)
    if abs(n_per_year * step - 1.0) > 1e-12:
        return np.asarray(table.visit_times)
    return np.arange(0.0, math.floor(table.visit_times[-1]) + 1.0)


def cmd_estimate(cfg: RunConfig, acs_file: str, out: Path) -> int:
    table = read_acs_table(acs_file)
    if table.visit_times.size < 2:
        raise DataError("need at least two visits")
    try:
        obs = observed_fractions(table)
    except ZeroTotalError as exc:
        raise DataError(str(exc)) from None
    options = FitOptions(step=cfg.ode_step)
    results = {}
    for kind in cfg.kinds():
        start = cfg.initial
        if kind is Objective.ML:
            if Objective.LS in results:
                start = results[Objective.LS].theta_hat
            start = ml_start(table, start)
        try:
            results[kind] = fit(kind, table, start, options)
        except ValueError as exc:
            raise DataError(f"{kind.value} fit failed: {exc}") from None

    rows = []
    for kind, res in results.items():
        rows.append([kind.value, *res.theta_hat.as_tuple(), res.objective_value, res.converged, res.n_evaluations])
        print(
            f"{kind.value}: theta1={res.theta_hat.theta1:.4f} theta2={res.theta_hat.theta2:.6g} "
            f"theta3={res.theta_hat.theta3:.4f} converged={res.converged}"
        )
    _write_csv(
        out / "estimates.csv",
        ["kind", *PARAM_NAMES, "objective_value", "converged", "n_evaluations"],
        rows,
    )

    dense = _dense_times(table, cfg.ode_step)
    curve = []
    for kind, res in results.items():
        path = solve_idm(res.theta_hat, step=cfg.ode_step, output_times=dense)
        curve.extend([kind.value, t, *p] for t, p in zip(path.times, path.values))
    _write_csv(out / "model_curve.csv", ["kind", "t", "p1", "p2", "p3"], curve)
    _write_csv(
        out / "observed.csv",
        ["t", "n", "p1", "p2", "p3"],
        ([t, n, *p] for t, n, p in zip(table.visit_times, table.totals, obs)),
    )
    return EXIT_OK


def cmd_bootstrap(cfg: RunConfig, out: Path) -> int:
    seed = _seed(cfg)
    if cfg.fixed_mask:
        if cfg.plan is None:
            raise ConfigError("fixed_mask needs a visit plan file (--plan)")
        plan = read_visit_plan(cfg.plan, cfg.p_part)
        n = plan.n_subjects
    else:
        n = cfg.n_subjects
        plan = VisitPlan(np.asarray(cfg.visit_times), np.zeros((0, len(cfg.visit_times)), bool), cfg.p_part)
    runs = run_bootstrap(
        cfg.theta,
        n,
        plan,
        cfg.B,
        seed,
        fixed_mask=cfg.fixed_mask,
        workers=cfg.workers,
        initial=cfg.initial,
        options=FitOptions(step=cfg.ode_step),
    )
    rows = []
    for run in runs:
        for kind in (Objective.LS, Objective.ML):
            est = run.estimate(kind)
            vals = est.as_tuple() if est is not None else ("nan",) * 3
            rows.append([run.b_index, kind.value, *vals, run.converged(kind)])
    _write_csv(out / "replicates.csv", ["b", "kind", *PARAM_NAMES, "converged"], rows)

    summaries = {}
    for kind in (Objective.LS, Objective.ML):
        try:
            summaries[kind] = quantile_summary(runs, kind)
        except ValueError:
            summaries[kind] = None
    if all(s is None for s in summaries.values()):
        print("every bootstrap replicate failed", file=sys.stderr)
        return EXIT_ALL_FAILED

    scale = (1.0, 1e4, 1.0)
    names = ("theta1", "theta2_per_10000", "theta3")
    header = ["parameter", "reference"]
    for kind in summaries:
        k = kind.value.lower()
        header += [f"{k}_median", f"{k}_q025", f"{k}_q975", f"{k}_n_converged"]
    header.append("B")
    table_rows = []
    for i, name in enumerate(names):
        row = [name, "" if cfg.reference is None else cfg.reference.as_tuple()[i] * scale[i]]
        for s in summaries.values():
            if s is None:
                row += ["", "", "", 0]
            else:
                row += [s.median[i] * scale[i], s.q025[i] * scale[i], s.q975[i] * scale[i], s.n_converged]
        row.append(cfg.B)
        table_rows.append(row)
    _write_csv(out / "summary.csv", header, table_rows)

    print(f"{'parameter':<18}{'LS median (2.5, 97.5)%':<28}{'ML median (2.5, 97.5)%':<28}")
    for i, name in enumerate(names):
        cells = []
        for s in summaries.values():
            if s is None:
                cells.append("-")
            else:
                f = scale[i]
                cells.append(f"{s.median[i] * f:.3g} ({s.q025[i] * f:.3g}, {s.q975[i] * f:.3g})")
        print(f"{name:<18}" + "".join(f"{c:<28}" for c in cells))
    return EXIT_OK


def fd_histogram(values: np.ndarray):
    """Counts and left bin edges with Freedman-Diaconis width."""
    edges = np.histogram_bin_edges(values, bins="fd")
    counts, edges = np.histogram(values, bins=edges)
    return edges[:-1], counts


def cmd_report(replicates_file: str, out: Path) -> int:
    with open(replicates_file, encoding="utf-8", newline="") as fh:
        reader = csv.DictReader(fh)
        needed = {"b", "kind", *PARAM_NAMES, "converged"}
        if reader.fieldnames is None or needed - set(reader.fieldnames):
            raise DataError(f"{replicates_file}: header must contain {sorted(needed)}")
        data: dict = {}
        for lineno, row in enumerate(reader, 2):
            try:
                kind = Objective(row["kind"]).value
                ok = _parse_bool(row["converged"])
                vals = [float(row[p]) for p in PARAM_NAMES]
            except (ValueError, ConfigError):
                raise DataError(f"{replicates_file}: line {lineno}: malformed replicate row") from None
            if ok:
                data.setdefault(kind, []).append(vals)
    for kind, vals in sorted(data.items()):
        arr = np.array(vals)
        for j, name in enumerate(PARAM_NAMES):
            left, counts = fd_histogram(arr[:, j])
            _write_csv(out / f"hist_{kind}_{name}.csv", ["bin_left", "count"], zip(left, counts))
    print(f"wrote histograms for {', '.join(sorted(data)) or 'no converged replicates'}")
    return EXIT_OK


# --- entry point ------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="key = value settings file")
    common.add_argument("--seed", help="unsigned 64-bit master seed")
    common.add_argument("--out", default=".", help="output directory")
    common.add_argument("--theta", help="theta1,theta2,theta3 (generator / theta*)")
    common.add_argument("--initial", help="starting point theta1,theta2,theta3")
    common.add_argument("--n-subjects", dest="n_subjects", type=int)
    common.add_argument("--visit-times", dest="visit_times")
    common.add_argument("--p-part", dest="p_part", type=float)
    common.add_argument("--ode-step", dest="ode_step", type=float)

    parser = argparse.ArgumentParser(prog="acsidm", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)
    sub.add_parser("simulate", parents=[common], help="simulate an ACS table and visit histogram")
    p = sub.add_parser("estimate", parents=[common], help="fit theta to an ACS table")
    p.add_argument("acs_file")
    p.add_argument("--objective", choices=["LS", "ML", "both"])
    p = sub.add_parser("bootstrap", parents=[common], help="schema-preserving parametric bootstrap")
    p.add_argument("--B", "-B", dest="B", type=int)
    p.add_argument("--workers", type=int)
    p.add_argument("--fixed-mask", dest="fixed_mask", action="store_const", const=True)
    p.add_argument("--plan", help="visit plan CSV for --fixed-mask")
    p.add_argument("--reference", help="reference theta for the summary table")
    p = sub.add_parser("report", parents=[common], help="histogram data from a replicates file")
    p.add_argument("replicates_file")
    return parser


_FLAG_KEYS = (
    "seed", "theta", "initial", "n_subjects", "visit_times", "p_part", "ode_step",
    "objective", "B", "workers", "fixed_mask", "plan", "reference",
)


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = load_config(args.config)
        for key in _FLAG_KEYS:
            value = getattr(args, key, None)
            if value is not None:
                cfg = _apply(cfg, key, value)
        cfg = _validate(cfg)
    except ConfigError as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except OSError as exc:
        print(f"cannot read configuration: {exc}", file=sys.stderr)
        return EXIT_IO

    out = Path(args.out)
    try:
        out.mkdir(parents=True, exist_ok=True)
        if args.command == "simulate":
            return cmd_simulate(cfg, out)
        if args.command == "estimate":
            return cmd_estimate(cfg, args.acs_file, out)
        if args.command == "bootstrap":
            return cmd_bootstrap(cfg, out)
        return cmd_report(args.replicates_file, out)
    except ConfigError as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except DataError as exc:
        print(f"data error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except OSError as exc:
        print(f"I/O error: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())

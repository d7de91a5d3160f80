"""Run configurations, single runs, (N, dt) sweeps and CSV artifacts."""

import csv
import io
import logging
import math
import re
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, fields, replace
from pathlib import Path
from typing import Optional

import numpy as np

from . import diagnostics, problems, spectral, stepper
from .errors import ContractError, NonConvergenceError

log = logging.getLogger(__name__)

SWEEP_COLUMNS = ["N", "dt", "error_u", "error_v", "iters", "converged", "wall_seconds"]
ORDER_COLUMNS = ["N", "dt_pair", "p_u", "p_v"]


class ConfigError(ContractError):
    """Malformed or inconsistent run configuration."""


def fmt(x):
    """Shortest round-trip decimal for floats; ints and strings pass through."""
    if isinstance(x, (bool, np.bool_)):
        return "true" if x else "false"
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    if isinstance(x, (float, np.floating)):
        return repr(float(x))
    return str(x)


_POW = re.compile(r"^\s*([-+]?\d+(?:\.\d*)?)\s*(?:\^|\*\*)\s*([-+]?\d+)\s*$")


def parse_number(text):
    """Float from ``text``; also accepts powers written ``2^-10`` or ``2**-10``."""
    m = _POW.match(text)
    if m:
        return float(m.group(1)) ** int(m.group(2))
    try:
        return float(text)
    except ValueError:
        raise ConfigError(f"not a number: {text!r}") from None


def parse_int_range(text):
    """``"4..12"`` -> (4, ..., 12); ``"5,7"`` -> (5, 7)."""
    text = text.strip()
    try:
        if ".." in text:
            lo, hi = (int(p) for p in text.split(".."))
            step = 1 if hi >= lo else -1
            return tuple(range(lo, hi + step, step))
        return tuple(int(p) for p in text.split(",") if p.strip())
    except ValueError:
        raise ConfigError(f"not an integer range: {text!r}") from None


def parse_key_values(lines):
    """Flat ``key = value`` pairs; '#' starts a comment."""
    out = {}
    for lineno, raw in enumerate(lines, 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected key=value, got {raw.strip()!r}")
        key, value = (s.strip() for s in line.split("=", 1))
        if not key:
            raise ConfigError(f"line {lineno}: empty key")
        out[key] = value
    return out


def load_config(path=None, overrides=()):
    """Merge a config file (optional) with ``key=value`` override strings."""
    values = {}
    if path is not None:
        try:
            text = Path(path).read_text()
        except OSError as exc:
            raise ConfigError(f"cannot read config {path}: {exc}") from None
        values.update(parse_key_values(text.splitlines()))
    values.update(parse_key_values(overrides))
    return values


@dataclass(frozen=True)
class RunConfig:
    problem: str = "linear-kg"
    L: Optional[float] = None
    N: int = 32
    J: Optional[int] = None
    theta: float = 0.5
    dt: float = 2.0**-10
    t_final: float = 1.0
    snapshot_times: tuple = ()
    fp_tol: float = 1e-14
    fp_rtol: float = 1e-14
    fp_max_iter: int = 100
    output_path: str = "kg_output"
    # custom-polynomial only
    poly: tuple = (0.0, 1.0)
    alpha: float = -1.0
    beta: float = 1.0
    u_amp: float = 1.0
    v_amp: float = 0.0
    # sine-gordon only: degree used for the default J
    effective_degree: int = 3

    def __post_init__(self):
        if self.problem not in problems.PROBLEMS:
            raise ConfigError(f"unknown problem {self.problem!r}; choose from {sorted(problems.PROBLEMS)}")
        if self.t_final < 0:
            raise ConfigError("t_final must be >= 0")
        try:
            stepper.num_steps(self.t_final, self.dt)
        except ContractError as exc:
            raise ConfigError(str(exc)) from None
        for t in self.snapshot_times:
            if not 0 <= t <= self.t_final:
                raise ConfigError(f"snapshot time {t} outside [0, {self.t_final}]")
            try:
                stepper.num_steps(t, self.dt)
            except ContractError as exc:
                raise ConfigError(str(exc)) from None

    @classmethod
    def from_mapping(cls, values):
        kwargs = {}
        known = {f.name: f for f in fields(cls)}
        aliases = {"T": "t_final"}
        for key, raw in values.items():
            key = aliases.get(key, key)
            if key not in known:
                continue
            raw = str(raw).strip()
            if key in ("problem", "output_path"):
                kwargs[key] = raw
            elif key in ("N", "J", "fp_max_iter", "effective_degree"):
                if key == "J" and raw.lower() in ("", "auto"):
                    continue
                value = parse_number(raw)
                if value != int(value):
                    raise ConfigError(f"{key} must be an integer, got {raw!r}")
                kwargs[key] = int(value)
            elif key in ("snapshot_times", "poly"):
                kwargs[key] = tuple(parse_number(p) for p in raw.split(",") if p.strip())
            elif key == "L" and raw.lower() in ("", "auto"):
                continue
            else:
                kwargs[key] = parse_number(raw)
        return cls(**kwargs)

    def build(self):
        """(problem, grid, params) for this configuration."""
        if self.problem == "linear-kg":
            prob = problems.linear_kg(**({} if self.L is None else {"L": self.L}))
        elif self.problem == "sine-gordon":
            prob = problems.sine_gordon(L=self.L, effective_degree=self.effective_degree)
        else:
            prob = problems.custom_polynomial(
                self.poly,
                alpha=self.alpha,
                beta=self.beta,
                u_amp=self.u_amp,
                v_amp=self.v_amp,
                **({} if self.L is None else {"L": self.L}),
            )
        grid = prob.default_grid(self.N) if self.J is None else spectral.GridSpec(prob.L, self.N, self.J)
        params = stepper.SolverParams(
            theta=self.theta, dt=self.dt, fp_tol=self.fp_tol, fp_rtol=self.fp_rtol, fp_max_iter=self.fp_max_iter
        )
        return prob, grid, params


@dataclass(frozen=True)
class SweepConfig:
    base: RunConfig
    dt_exponents: tuple = (4, 5, 6, 7, 8, 9, 10, 11, 12)
    N_exponents: tuple = (5,)

    def __post_init__(self):
        if not self.dt_exponents or not self.N_exponents:
            raise ConfigError("sweep ranges must be nonempty")

    @classmethod
    def from_mapping(cls, values):
        kwargs = {}
        if "dt_exponents" in values:
            kwargs["dt_exponents"] = parse_int_range(values["dt_exponents"])
        if "N_exponents" in values:
            kwargs["N_exponents"] = parse_int_range(values["N_exponents"])
        return cls(RunConfig.from_mapping(values), **kwargs)

    def cells(self):
        """(N, dt) pairs ordered by N ascending, dt descending."""
        return [(2**n, 2.0**-e) for n in sorted(set(self.N_exponents)) for e in sorted(set(self.dt_exponents))]


@dataclass
class Snapshot:
    time: float
    x: np.ndarray
    u: np.ndarray
    v: np.ndarray


@dataclass
class RunResult:
    config: RunConfig
    grid: spectral.GridSpec
    snapshots: list = field(default_factory=list)
    errors: list = field(default_factory=list)  # (t, error_u, error_v)
    reports: list = field(default_factory=list)  # (step, t, StepReport)
    failure: Optional[NonConvergenceError] = None
    final_state: Optional[stepper.SpectralState] = None

    @property
    def converged(self):
        return self.failure is None

    @property
    def max_iterations(self):
        return max((r.iterations_used for _, _, r in self.reports), default=0)


def run_single(config, record_steps=True):
    """Evolve one configuration; snapshots at ``snapshot_times`` and at ``t_final``.

    Non-convergence does not raise: it is stored in ``result.failure``.
    """
    prob, grid, params = config.build()
    result = RunResult(config, grid)
    x = grid.x_points
    wanted = {stepper.num_steps(t, params.dt): t for t in config.snapshot_times}
    n_final = stepper.num_steps(config.t_final, params.dt)
    wanted.setdefault(n_final, config.t_final)

    def record(t, u, v):
        result.snapshots.append(Snapshot(t, x, u, v))
        if prob.exact is not None:
            exact_u, exact_v = prob.exact(x, t)
            eu = float(np.max(diagnostics.pointwise_error(exact_u, u)))
            ev = float(np.max(diagnostics.pointwise_error(exact_v, v)))
            result.errors.append((t, eu, ev))

    if 0 in wanted:
        record(wanted[0], *prob.initial_fields(grid))

    state0 = stepper.initial_state(prob, grid)
    counter = [0]

    def observer(state, report):
        counter[0] += 1
        i = counter[0]
        if record_steps:
            result.reports.append((i, state.time, report))
        elif report.iterations_used > result.max_iterations:
            result.reports[:] = [(i, state.time, report)]
        if i in wanted:
            record(wanted[i], spectral.synthesize(state.u, grid), spectral.synthesize(state.v, grid))

    try:
        result.final_state = stepper.evolve(state0, config.t_final, params, prob, grid, observer)
    except NonConvergenceError as exc:
        log.error("run failed: N=%d dt=%r: %s", grid.N, params.dt, exc)
        result.failure = exc
    return result


def _snapshot_header(result, snap):
    c = result.config
    return (
        f"# problem={c.problem} N={result.grid.N} J={result.grid.J} L={fmt(result.grid.L)} "
        f"theta={fmt(c.theta)} dt={fmt(c.dt)} t={fmt(snap.time)}\n"
    )


def write_run(result, outdir):
    """Write snapshot_<k>.csv, errors.csv, steps.csv (and failure.csv) into ``outdir``."""
    outdir = Path(outdir)
    outdir.mkdir(parents=True, exist_ok=True)
    for k, snap in enumerate(sorted(result.snapshots, key=lambda s: s.time)):
        with open(outdir / f"snapshot_{k:03d}.csv", "w", newline="") as fh:
            fh.write(_snapshot_header(result, snap))
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["x", "u", "v"])
            w.writerows((fmt(a), fmt(b), fmt(c)) for a, b, c in zip(snap.x, snap.u, snap.v))
    if result.errors:
        with open(outdir / "errors.csv", "w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["t", "error_u", "error_v"])
            w.writerows((fmt(t), fmt(eu), fmt(ev)) for t, eu, ev in sorted(result.errors))
    with open(outdir / "steps.csv", "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["step", "t", "iterations", "residual", "converged"])
        w.writerows(
            (i, fmt(t), r.iterations_used, fmt(r.final_residual), fmt(r.converged)) for i, t, r in result.reports
        )
    if result.failure is not None:
        exc = result.failure
        with open(outdir / "failure.csv", "w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["N", "dt", "step_index", "iterations", "residual"])
            w.writerow([result.grid.N, fmt(result.config.dt), exc.step_index, exc.iterations, fmt(exc.residual)])


def run_cell(base, N, dt):
    """One sweep cell as a row dict keyed by :data:`SWEEP_COLUMNS`."""
    config = replace(base, N=N, dt=dt, snapshot_times=())
    start = time.perf_counter()
    result = run_single(config, record_steps=False)
    wall = time.perf_counter() - start
    if result.converged and result.errors:
        _, eu, ev = result.errors[-1]
    else:
        eu = ev = math.nan
    iters = result.failure.iterations if result.failure is not None else result.max_iterations
    return {
        "N": N,
        "dt": dt,
        "error_u": eu,
        "error_v": ev,
        "iters": iters,
        "converged": result.converged,
        "wall_seconds": wall,
    }


def _run_cell_args(args):
    return run_cell(*args)


def run_sweep(config, jobs=1):
    """All (N, dt) cells; failures are recorded in the row, never raised."""
    tasks = [(config.base, N, dt) for N, dt in config.cells()]
    if jobs > 1 and len(tasks) > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            rows = list(pool.map(_run_cell_args, tasks))
    else:
        rows = [run_cell(*t) for t in tasks]
    rows.sort(key=lambda r: (r["N"], -r["dt"]))
    return rows


def write_sweep(rows, fh, timing=True):
    w = csv.writer(fh, lineterminator="\n")
    w.writerow(SWEEP_COLUMNS)
    for r in rows:
        r = dict(r, wall_seconds=r["wall_seconds"] if timing else 0.0)
        w.writerow([fmt(r[c]) for c in SWEEP_COLUMNS])


def read_sweep(fh):
    rows = []
    for rec in csv.DictReader(fh):
        try:
            rows.append(
                {
                    "N": int(rec["N"]),
                    "dt": float(rec["dt"]),
                    "error_u": float(rec["error_u"]),
                    "error_v": float(rec["error_v"]),
                    "iters": int(rec["iters"]),
                    "converged": rec["converged"].strip().lower() == "true",
                    "wall_seconds": float(rec["wall_seconds"]),
                }
            )
        except (KeyError, ValueError) as exc:
            raise ConfigError(f"malformed sweep row {rec}: {exc}") from None
    return rows


def orders_from_sweep(rows):
    """Observed orders between consecutive halving dt values, per N."""
    out = []
    for N in sorted({r["N"] for r in rows}):
        cells = sorted((r for r in rows if r["N"] == N), key=lambda r: -r["dt"])
        for r0, r1 in zip(cells, cells[1:]):
            if not math.isclose(r1["dt"], 0.5 * r0["dt"], rel_tol=1e-12):
                continue
            pu = diagnostics.observed_order([(r0["dt"], r0["error_u"]), (r1["dt"], r1["error_u"])])[0]
            pv = diagnostics.observed_order([(r0["dt"], r0["error_v"]), (r1["dt"], r1["error_v"])])[0]
            out.append({"N": N, "dt_pair": f"{fmt(r0['dt'])}/{fmt(r1['dt'])}", "p_u": pu, "p_v": pv})
    return out


def write_orders(rows, fh):
    w = csv.writer(fh, lineterminator="\n")
    w.writerow(ORDER_COLUMNS)
    for r in rows:
        w.writerow([fmt(r[c]) for c in ORDER_COLUMNS])


def exact_table(problem, grid, times):
    """Rows (x, t, u_exact, v_exact) on the grid at each time."""
    if problem.exact is None:
        raise ConfigError(f"problem {problem.name!r} has no exact solution")
    rows = []
    for t in times:
        u, v = problem.exact(grid.x_points, t)
        rows.extend(zip(grid.x_points, [t] * grid.J, u, v))
    return rows


def write_exact(rows, fh):
    w = csv.writer(fh, lineterminator="\n")
    w.writerow(["x", "t", "u_exact", "v_exact"])
    w.writerows([fmt(float(c)) for c in row] for row in rows)


def to_csv_text(writer, rows, **kwargs):
    buf = io.StringIO()
    writer(rows, buf, **kwargs)
    return buf.getvalue()

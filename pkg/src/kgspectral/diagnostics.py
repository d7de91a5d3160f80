"""Error functional, energy and observed convergence orders."""

import math
from dataclasses import dataclass

import numpy as np

from . import spectral
from .errors import ContractError, UnsupportedDiagnosticError

__all__ = [
    "ErrorReport",
    "pointwise_error",
    "field_error",
    "state_errors",
    "energy",
    "observed_order",
]


@dataclass(frozen=True, eq=False)
class ErrorReport:
    per_point: np.ndarray
    max_error: float
    field_label: str
    time: float


def pointwise_error(exact, numeric):
    """min(absolute error, relative error), elementwise.

    The relative error is measured against |exact|; where exact is zero only
    the absolute error is available.
    """
    exact = np.asarray(exact, dtype=np.float64)
    numeric = np.asarray(numeric, dtype=np.float64)
    abs_err = np.abs(exact - numeric)
    mag = np.abs(exact)
    with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
        rel_err = np.where(mag > 0, abs_err / np.where(mag > 0, mag, 1.0), np.inf)
    out = np.minimum(abs_err, rel_err)
    return float(out) if out.ndim == 0 else out


def field_error(numeric, exact_fn, grid, t, label="u"):
    """Grid maximum of :func:`pointwise_error` against ``exact_fn(x, t)``."""
    numeric = np.asarray(numeric, dtype=np.float64)
    if numeric.shape != (grid.J,):
        raise ContractError(f"field must have shape ({grid.J},), got {numeric.shape}")
    per_point = pointwise_error(exact_fn(grid.x_points, t), numeric)
    return ErrorReport(per_point, float(per_point.max()), label, float(t))


def state_errors(state, problem, grid):
    """ErrorReports for u and v of a spectral state against the problem's exact solution."""
    if problem.exact is None:
        raise UnsupportedDiagnosticError(f"problem {problem.name!r} has no exact solution")
    t = state.time
    u = spectral.synthesize(state.u, grid)
    v = spectral.synthesize(state.v, grid)
    exact_u, exact_v = problem.exact(grid.x_points, t)
    per_u = pointwise_error(exact_u, u)
    per_v = pointwise_error(exact_v, v)
    return (
        ErrorReport(per_u, float(per_u.max()), "u", t),
        ErrorReport(per_v, float(per_v.max()), "v", t),
    )


def energy(state, grid, problem):
    """Klein-Gordon energy  integral of  v^2/2 - alpha u_x^2/2 + beta G(u)  by grid quadrature.

    G is the potential of F with G(0) = 0; u_x is evaluated spectrally.
    """
    nl = problem.nonlinearity
    if nl.kind not in ("linear", "sine-gordon", "polynomial", "zero"):
        raise UnsupportedDiagnosticError(f"no potential known for {nl.kind!r}")
    u = spectral.synthesize(state.u, grid)
    v = spectral.synthesize(state.v, grid)
    ux = spectral.synthesize(spectral.derivative(state.u, grid), grid)
    density = 0.5 * v * v - 0.5 * problem.alpha * ux * ux + problem.beta * nl.potential(u)
    return float(grid.L / grid.J * density.sum())


def observed_order(errors):
    """log2 of successive error ratios for ``[(dt, error), ...]`` with dt halving.

    Pairs involving a zero or non-finite error give ``nan``.
    """
    errors = list(errors)
    for (dt0, _), (dt1, _) in zip(errors, errors[1:]):
        if not math.isclose(dt1, 0.5 * dt0, rel_tol=1e-12):
            raise ContractError(f"dt sequence must halve at each entry, got {dt0} -> {dt1}")
    orders = []
    for (_, e0), (_, e1) in zip(errors, errors[1:]):
        if e0 > 0 and e1 > 0 and math.isfinite(e0) and math.isfinite(e1):
            orders.append(math.log2(e0 / e1))
        else:
            orders.append(math.nan)
    return orders

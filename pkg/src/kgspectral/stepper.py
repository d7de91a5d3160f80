"""Theta-scheme time stepping of the Fourier-Galerkin system.

For each retained mode l (wavenumber k_l = 2 pi l / L) the semi-discrete
system is

    a_l' = c_l,   c_l' = alpha k_l^2 a_l - beta F_l,
    b_l' = d_l,   d_l' = alpha k_l^2 b_l - beta G_l,
    a_0' = c_0,   c_0' = -beta F_0,

where (F_0, F_l, G_l) are the quadrature Fourier coefficients of F(u).
One step of the theta-scheme is implicit in the new level; it is solved by
plain fixed-point (Picard) sweeps that re-evaluate the right-hand side at the
previous iterate. For alpha < 0 the sweeps contract only while roughly
theta * dt * sqrt(|alpha| k_N^2 + |beta|) < 1 (k_N the largest retained
wavenumber); beyond that the iteration diverges and
:class:`NonConvergenceError` is raised.
"""

import math
from dataclasses import dataclass

import numpy as np

from .errors import ContractError, DivergenceError, NonConvergenceError
from .problems import nonlinear_spectrum_arrays
from .spectral import RealCoeffs, analyze

__all__ = [
    "SpectralState",
    "SolverParams",
    "StepReport",
    "initial_state",
    "fixed_point_sweep",
    "step",
    "evolve",
    "implicit_residual",
    "num_steps",
]


@dataclass(frozen=True)
class SpectralState:
    """Coefficients of u (a0, a_l, b_l) and v (c0, c_l, d_l) at one time level."""

    u: RealCoeffs
    v: RealCoeffs
    time: float = 0.0

    def __post_init__(self):
        if self.u.N != self.v.N:
            raise ContractError(f"u and v carry different mode counts ({self.u.N} vs {self.v.N})")

    @property
    def N(self):
        return self.u.N

    def to_vector(self):
        """Pack as ``[a0, a, b, c0, c, d]``."""
        return np.concatenate((self.u.to_vector(), self.v.to_vector()))

    @classmethod
    def from_vector(cls, vec, time=0.0):
        half = vec.size // 2
        return cls(RealCoeffs.from_vector(vec[:half]), RealCoeffs.from_vector(vec[half:]), time)


@dataclass(frozen=True)
class SolverParams:
    """theta, dt and the fixed-point stopping rule.

    A sweep is accepted as converged once the max-norm change of the
    coefficient vector is at most ``fp_tol + fp_rtol * max|coefficient|``.
    """

    theta: float = 0.5
    dt: float = 2.0**-10
    fp_tol: float = 1e-14
    fp_rtol: float = 1e-14
    fp_max_iter: int = 100

    def __post_init__(self):
        if not 0.0 <= self.theta <= 1.0:
            raise ContractError(f"theta must lie in [0, 1], got {self.theta}")
        if not (self.dt > 0 and math.isfinite(self.dt)):
            raise ContractError(f"dt must be positive, got {self.dt}")
        if not self.fp_tol > 0 or self.fp_rtol < 0:
            raise ContractError("fp_tol must be > 0 and fp_rtol >= 0")
        if int(self.fp_max_iter) != self.fp_max_iter or self.fp_max_iter < 1:
            raise ContractError(f"fp_max_iter must be an integer >= 1, got {self.fp_max_iter}")


@dataclass(frozen=True)
class StepReport:
    iterations_used: int
    final_residual: float
    converged: bool
    tolerance: float = 0.0


def initial_state(problem, grid, t0=0.0):
    """Project the problem's initial data onto the grid's Fourier modes."""
    f, g = problem.initial_fields(grid)
    return SpectralState(analyze(f, grid), analyze(g, grid), t0)


class _Layout:
    """Slices into the packed vector [a0, a(N), b(N), c0, c(N), d(N)]."""

    def __init__(self, N):
        self.N = N
        self.a0 = 0
        self.a = slice(1, N + 1)
        self.b = slice(N + 1, 2 * N + 1)
        self.c0 = 2 * N + 1
        self.c = slice(2 * N + 2, 3 * N + 2)
        self.d = slice(3 * N + 2, 4 * N + 2)
        self.u = slice(0, 2 * N + 1)
        self.v = slice(2 * N + 1, 4 * N + 2)


def _rhs(x, lay, grid, problem, stiffness):
    """Semi-discrete time derivative of the packed state."""
    a0, a, b = x[lay.a0], x[lay.a], x[lay.b]
    f0, fc, fs = nonlinear_spectrum_arrays(a0, a, b, grid, problem.nonlinearity)
    beta = problem.beta
    out = np.empty_like(x)
    out[lay.u] = x[lay.v]
    out[lay.c0] = -beta * f0
    out[lay.c] = stiffness * a - beta * fc
    out[lay.d] = stiffness * b - beta * fs
    return out


def _check_setup(state, grid, problem):
    if state.N != grid.N:
        raise ContractError(f"state carries N={state.N} modes but grid has N={grid.N}")
    if not math.isclose(problem.L, grid.L, rel_tol=1e-15):
        raise ContractError(f"grid length {grid.L} differs from problem length {problem.L}")


def fixed_point_sweep(state_n, guess, params, problem, grid):
    """One Picard sweep: the (nu+1)-th iterate of level n+1 from the nu-th ``guess``."""
    _check_setup(state_n, grid, problem)
    if guess.N != state_n.N:
        raise ContractError("guess and state_n carry different mode counts")
    lay = _Layout(grid.N)
    stiffness = problem.alpha * grid.wavenumbers**2
    dt, theta = params.dt, params.theta
    xn = state_n.to_vector()
    explicit = xn + (1.0 - theta) * dt * _rhs(xn, lay, grid, problem, stiffness)
    new = explicit + theta * dt * _rhs(guess.to_vector(), lay, grid, problem, stiffness)
    if not np.all(np.isfinite(new)):
        raise DivergenceError("fixed-point sweep produced non-finite coefficients", math.inf, 1)
    return SpectralState.from_vector(new, state_n.time)


def _step_vector(xn, dt, theta, params, lay, grid, problem, stiffness):
    explicit = xn + ((1.0 - theta) * dt) * _rhs(xn, lay, grid, problem, stiffness)
    if theta == 0.0:
        return explicit, StepReport(1, 0.0, True, params.fp_tol)
    x = xn
    residual = math.inf
    for it in range(1, params.fp_max_iter + 1):
        with np.errstate(over="ignore", invalid="ignore"):
            new = explicit + (theta * dt) * _rhs(x, lay, grid, problem, stiffness)
        diff = np.abs(new - x)
        residual = float(diff.max())
        if not math.isfinite(residual):
            raise DivergenceError(
                f"fixed-point iterates diverged after {it} sweeps (N={grid.N}, dt={dt:g})", residual, it
            )
        tol = params.fp_tol + params.fp_rtol * float(np.abs(new).max())
        x = new
        if residual <= tol:
            return x, StepReport(it, residual, True, tol)
    raise NonConvergenceError(
        f"fixed-point iteration did not converge in {params.fp_max_iter} sweeps "
        f"(N={grid.N}, dt={dt:g}, residual={residual:.3e})",
        residual,
        params.fp_max_iter,
    )


def step(state_n, params, problem, grid):
    """Advance one theta-scheme step; returns ``(state_{n+1}, StepReport)``.

    The iteration is seeded with the level-n state. theta = 0 is explicit
    and takes a single evaluation.
    """
    _check_setup(state_n, grid, problem)
    lay = _Layout(grid.N)
    stiffness = problem.alpha * grid.wavenumbers**2
    x, report = _step_vector(state_n.to_vector(), params.dt, params.theta, params, lay, grid, problem, stiffness)
    return SpectralState.from_vector(x, state_n.time + params.dt), report


def implicit_residual(state_n, state_np1, params, problem, grid):
    """Max-norm defect of the full theta-scheme equations for a (n, n+1) pair."""
    lay = _Layout(grid.N)
    stiffness = problem.alpha * grid.wavenumbers**2
    xn, xp = state_n.to_vector(), state_np1.to_vector()
    th, dt = params.theta, params.dt
    defect = xp - xn - dt * ((1 - th) * _rhs(xn, lay, grid, problem, stiffness) + th * _rhs(xp, lay, grid, problem, stiffness))
    return float(np.abs(defect).max())


def num_steps(t_span, dt):
    """Integer n with n * dt == t_span to within one ulp; ContractError otherwise."""
    if t_span < 0:
        raise ContractError(f"cannot integrate backwards (span {t_span})")
    n = round(t_span / dt)
    if abs(n * dt - t_span) > math.ulp(max(abs(t_span), dt)):
        raise ContractError(f"time span {t_span!r} is not an integer multiple of dt={dt!r}")
    return n


def evolve(initial, t_final, params, problem, grid, observer=None):
    """Take steps from ``initial.time`` to ``t_final``.

    ``observer(state, report)`` is called after every accepted step. A
    failing step re-raises :class:`NonConvergenceError` with ``step_index``
    set (1-based).
    """
    _check_setup(initial, grid, problem)
    n_steps = num_steps(t_final - initial.time, params.dt)
    lay = _Layout(grid.N)
    stiffness = problem.alpha * grid.wavenumbers**2
    x = initial.to_vector()
    if not np.all(np.isfinite(x)):
        raise ContractError("initial state must be finite")
    state = initial
    for i in range(1, n_steps + 1):
        try:
            x, report = _step_vector(x, params.dt, params.theta, params, lay, grid, problem, stiffness)
        except NonConvergenceError as exc:
            exc.step_index = i
            raise
        if observer is not None or i == n_steps:
            state = SpectralState.from_vector(x, initial.time + i * params.dt)
        if observer is not None:
            observer(state, report)
    return state

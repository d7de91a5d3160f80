"""Periodic Klein-Gordon-type problems  u_tt + alpha u_xx + beta F(u) = 0.

Written as a first-order system in (u, v = u_t) with initial data
u(x, 0) = f(x), v(x, 0) = g(x) on the periodic interval [0, L).
"""

import logging
import math
from dataclasses import dataclass, field
from functools import partial
from typing import Callable, Optional

import numpy as np

from . import spectral
from .elliptic import complete_elliptic_k, jacobi_sn_cn_dn
from .errors import AliasingError, ContractError, UnsupportedDiagnosticError

__all__ = [
    "Nonlinearity",
    "ProblemSpec",
    "apply_nonlinearity",
    "nonlinear_spectrum",
    "linear_exact",
    "sine_gordon_exact",
    "SINE_GORDON_MODULUS",
    "sine_gordon_period",
    "linear_kg",
    "sine_gordon",
    "custom_polynomial",
    "PROBLEMS",
    "make_problem",
]

log = logging.getLogger(__name__)

SINE_GORDON_MODULUS = 0.5
_PERIODIC_TOL = 1e-12


@dataclass(frozen=True)
class Nonlinearity:
    """The pointwise term F(u).

    ``kind`` is one of ``"linear"``, ``"sine-gordon"``, ``"polynomial"`` or
    ``"zero"``. For polynomials ``coeffs[i]`` multiplies ``u**i``.
    ``degree_bound`` is the degree M used in the collocation bound
    J >= (M+1)N + 1; sin u has no finite degree, so the sine-Gordon variant
    carries a configurable effective degree instead.
    """

    kind: str
    coeffs: tuple = ()
    degree_bound: Optional[int] = None

    def __post_init__(self):
        if self.kind not in ("linear", "sine-gordon", "polynomial", "zero"):
            raise ContractError(f"unknown nonlinearity kind {self.kind!r}")
        if self.kind == "polynomial":
            coeffs = tuple(float(c) for c in self.coeffs)
            if not coeffs or not all(math.isfinite(c) for c in coeffs):
                raise ContractError("polynomial coefficients must be a nonempty list of finite numbers")
            object.__setattr__(self, "coeffs", coeffs)
            if self.degree_bound is None:
                nonzero = [i for i, c in enumerate(coeffs) if c != 0.0]
                object.__setattr__(self, "degree_bound", max(nonzero[-1] if nonzero else 0, 1))
        elif self.degree_bound is None:
            object.__setattr__(self, "degree_bound", 3 if self.kind == "sine-gordon" else 1)

    @classmethod
    def linear(cls):
        return cls("linear")

    @classmethod
    def sine_gordon(cls, effective_degree=3):
        return cls("sine-gordon", degree_bound=effective_degree)

    @classmethod
    def polynomial(cls, coeffs):
        return cls("polynomial", tuple(coeffs))

    @classmethod
    def zero(cls):
        return cls("zero")

    @property
    def is_exact_polynomial(self):
        return self.kind != "sine-gordon"

    def __call__(self, u):
        u = np.asarray(u, dtype=np.float64)
        if self.kind == "linear":
            return u.copy()
        if self.kind == "sine-gordon":
            return np.sin(u)
        if self.kind == "zero":
            return np.zeros_like(u)
        # Horner
        out = np.full_like(u, self.coeffs[-1])
        for c in reversed(self.coeffs[:-1]):
            out = out * u + c
        return out

    def potential(self, u):
        """G with G' = F and G(0) = 0."""
        u = np.asarray(u, dtype=np.float64)
        if self.kind == "linear":
            return 0.5 * u * u
        if self.kind == "sine-gordon":
            return 1.0 - np.cos(u)
        if self.kind == "zero":
            return np.zeros_like(u)
        integrated = [0.0] + [c / (i + 1) for i, c in enumerate(self.coeffs)]
        out = np.full_like(u, integrated[-1])
        for c in reversed(integrated[:-1]):
            out = out * u + c
        return out

    def collocation_bound(self, N):
        return spectral.min_collocation(N, self.degree_bound)


@dataclass(frozen=True)
class ProblemSpec:
    """Coefficients, nonlinearity, domain and initial data of one problem.

    ``exact`` (if given) maps ``(x, t)`` to the pair ``(u, v)``.
    Initial data must be L-periodic to 1e-12 unless ``allow_nonperiodic``.
    """

    name: str
    alpha: float
    beta: float
    nonlinearity: Nonlinearity
    L: float
    initial_u: Callable
    initial_v: Callable
    exact: Optional[Callable] = None
    allow_nonperiodic: bool = field(default=False, compare=False)

    def __post_init__(self):
        if not (math.isfinite(self.L) and self.L > 0):
            raise ContractError(f"domain length must be positive, got {self.L}")
        if not (math.isfinite(self.alpha) and math.isfinite(self.beta)):
            raise ContractError("alpha and beta must be finite")
        ends = np.array([0.0, self.L])
        gap_u = abs(np.diff(np.asarray(self.initial_u(ends), dtype=float))[0])
        gap_v = abs(np.diff(np.asarray(self.initial_v(ends), dtype=float))[0])
        if max(gap_u, gap_v) > _PERIODIC_TOL:
            msg = f"{self.name}: initial data not periodic on [0, {self.L}] (jumps {gap_u:.3g}, {gap_v:.3g})"
            if not self.allow_nonperiodic:
                raise ContractError(msg)
            log.warning(msg)

    def default_grid(self, N):
        return spectral.GridSpec.auto(self.L, N, self.nonlinearity.degree_bound)

    def initial_fields(self, grid):
        x = grid.x_points
        return (np.asarray(self.initial_u(x), dtype=float), np.asarray(self.initial_v(x), dtype=float))

    def exact_fields(self, grid, t):
        if self.exact is None:
            raise UnsupportedDiagnosticError(f"problem {self.name!r} has no exact solution")
        return self.exact(grid.x_points, t)


def apply_nonlinearity(field, nl):
    """F evaluated pointwise on grid samples."""
    out = nl(field)
    if not np.all(np.isfinite(out)):
        raise ContractError("nonlinearity produced non-finite values")
    return out


def nonlinear_spectrum_arrays(a0, a, b, grid, nl):
    """(F0, F_l, G_l) from packed u-coefficients; no validation."""
    if nl.kind == "linear":
        # F = u commutes with projection; no transform needed
        return a0, a.copy(), b.copy()
    if nl.kind == "zero":
        return 0.0, np.zeros_like(a), np.zeros_like(b)
    samples = spectral.synth_arrays(a0, a, b, grid.J)
    return spectral.analyze_arrays(nl(samples), grid.N)


def nonlinear_spectrum(state_u, grid, nl, strict=False):
    """Fourier quadrature coefficients of F(u), u given by its coefficients.

    Computed as analyze(F(synthesize(u))). For a degree-M polynomial the
    result is the exact projection when J >= (M+1)N + 1; with ``strict`` a
    smaller J raises :class:`AliasingError`.
    """
    if state_u.N != grid.N:
        raise ContractError(f"coefficients carry N={state_u.N} modes but grid has N={grid.N}")
    bound = nl.collocation_bound(grid.N)
    if strict and grid.J < bound:
        raise AliasingError(f"J={grid.J} below the exactness bound {bound} for {nl.kind}")
    f0, fc, fs = nonlinear_spectrum_arrays(state_u.zero_mode, state_u.cos_modes, state_u.sin_modes, grid, nl)
    return spectral.RealCoeffs(f0, fc, fs)


def linear_exact(x, t, L):
    """Standing-wave solution of u_tt - u_xx + u = 0 with u(x,0) = 0, v(x,0) = cos(2 pi x / L)."""
    if not L > 0:
        raise ContractError(f"domain length must be positive, got {L}")
    x = np.asarray(x, dtype=np.float64)
    kx = 2.0 * np.pi / L
    omega = math.sqrt(1.0 + kx * kx)
    profile = np.cos(kx * x)
    return math.sin(omega * t) / omega * profile, math.cos(omega * t) * profile


def sine_gordon_exact(x, t):
    """Travelling periodic wave of u_tt - u_xx + sin u = 0 with speed sqrt(2)."""
    s = np.asarray(x, dtype=np.float64) - math.sqrt(2.0) * t
    k = SINE_GORDON_MODULUS
    sn, cn, dn = jacobi_sn_cn_dn(s, k)
    u = 2.0 * np.arcsin(k * sn)
    v = -math.sqrt(2.0) * cn * dn / np.sqrt(1.0 - k * k * sn * sn)
    return u, v


def sine_gordon_period():
    """Spatial period 4K(1/2) of the sine-Gordon benchmark."""
    return 4.0 * complete_elliptic_k(SINE_GORDON_MODULUS)


def _cos_profile(x, L, amplitude=1.0):
    return amplitude * np.cos(2.0 * np.pi * np.asarray(x, dtype=np.float64) / L)


def linear_kg(L=8.0):
    return ProblemSpec(
        name="linear-kg",
        alpha=-1.0,
        beta=1.0,
        nonlinearity=Nonlinearity.linear(),
        L=L,
        initial_u=lambda x: np.zeros_like(np.asarray(x, dtype=np.float64)),
        initial_v=partial(_cos_profile, L=L),
        exact=partial(linear_exact, L=L),
    )


def sine_gordon(L=None, effective_degree=3):
    """Sine-Gordon benchmark; L defaults to the exact period 4K(1/2)."""
    period = sine_gordon_period()
    if L is None:
        L = period
    return ProblemSpec(
        name="sine-gordon",
        alpha=-1.0,
        beta=1.0,
        nonlinearity=Nonlinearity.sine_gordon(effective_degree),
        L=L,
        initial_u=lambda x: sine_gordon_exact(x, 0.0)[0],
        initial_v=lambda x: sine_gordon_exact(x, 0.0)[1],
        exact=sine_gordon_exact,
        allow_nonperiodic=not math.isclose(L, period, rel_tol=1e-14),
    )


def custom_polynomial(coeffs, alpha=-1.0, beta=1.0, L=2.0 * np.pi, u_amp=1.0, v_amp=0.0):
    """Polynomial F with cosine initial data and no exact solution."""
    return ProblemSpec(
        name="custom-polynomial",
        alpha=alpha,
        beta=beta,
        nonlinearity=Nonlinearity.polynomial(coeffs),
        L=L,
        initial_u=partial(_cos_profile, L=L, amplitude=u_amp),
        initial_v=partial(_cos_profile, L=L, amplitude=v_amp),
    )


PROBLEMS = {
    "linear-kg": linear_kg,
    "sine-gordon": sine_gordon,
    "custom-polynomial": custom_polynomial,
}


def make_problem(name, **kwargs):
    try:
        factory = PROBLEMS[name]
    except KeyError:
        raise ContractError(f"unknown problem {name!r}; choose from {sorted(PROBLEMS)}") from None
    return factory(**kwargs)

"""Real Fourier transforms on a periodic collocation grid.

A field on ``[0, L)`` is represented either by its samples at the J
equispaced points ``x_j = j L / J`` or by its truncated real Fourier
series

    u(x) = a0 + sum_{l=1}^{N} a_l cos(2 pi l x / L) + b_l sin(2 pi l x / L).

``analyze`` returns the trapezoidal quadrature coefficients (weights 1/J for
the constant mode and 2/J for the others), which are the exact Fourier
coefficients whenever the sampled field is a trigonometric polynomial of
degree below J/2. Both directions go through ``numpy.fft`` real transforms;
a direct O(NJ) summation path is kept as a reference.
"""

from dataclasses import dataclass
from functools import cached_property

import numpy as np

from .errors import AliasingError, ContractError

__all__ = [
    "GridSpec",
    "RealCoeffs",
    "synthesize",
    "analyze",
    "derivative",
    "min_collocation",
    "next_pow2",
]


def next_pow2(n):
    """Smallest power of two >= n."""
    n = int(n)
    if n <= 1:
        return 1
    return 1 << (n - 1).bit_length()


def min_collocation(N, degree=1):
    """Collocation count that makes quadrature of a degree-``degree`` product exact."""
    return (degree + 1) * N + 1


@dataclass(frozen=True)
class GridSpec:
    """Periodic domain ``[0, L)`` with N retained mode pairs and J collocation points."""

    L: float
    N: int
    J: int

    def __post_init__(self):
        if not (np.isfinite(self.L) and self.L > 0):
            raise ContractError(f"domain length must be positive and finite, got {self.L}")
        if int(self.N) != self.N or self.N < 1:
            raise ContractError(f"mode count N must be an integer >= 1, got {self.N}")
        if int(self.J) != self.J:
            raise ContractError(f"collocation count J must be an integer, got {self.J}")
        object.__setattr__(self, "L", float(self.L))
        object.__setattr__(self, "N", int(self.N))
        object.__setattr__(self, "J", int(self.J))
        if self.J < 2 * self.N + 1:
            raise AliasingError(f"J={self.J} < 2N+1={2 * self.N + 1}")

    @classmethod
    def auto(cls, L, N, degree=1):
        """Grid with J the smallest power of two meeting the degree-``degree`` bound."""
        return cls(L, N, next_pow2(max(2 * N + 1, min_collocation(N, degree))))

    @cached_property
    def x_points(self):
        x = np.arange(self.J) * (self.L / self.J)
        x.flags.writeable = False
        return x

    @cached_property
    def wavenumbers(self):
        """``2 pi l / L`` for l = 1..N."""
        k = 2.0 * np.pi * np.arange(1, self.N + 1) / self.L
        k.flags.writeable = False
        return k


@dataclass(frozen=True, eq=False)
class RealCoeffs:
    """Constant, cosine and sine coefficients of a truncated real Fourier series."""

    zero_mode: float
    cos_modes: np.ndarray
    sin_modes: np.ndarray

    def __post_init__(self):
        cos_modes = np.asarray(self.cos_modes, dtype=np.float64)
        sin_modes = np.asarray(self.sin_modes, dtype=np.float64)
        if cos_modes.ndim != 1 or cos_modes.shape != sin_modes.shape:
            raise ContractError(
                f"cos/sin mode arrays must be 1-D with equal length, got {cos_modes.shape} and {sin_modes.shape}"
            )
        if cos_modes.size < 1:
            raise ContractError("at least one mode pair is required")
        zero_mode = float(self.zero_mode)
        if not (np.isfinite(zero_mode) and np.all(np.isfinite(cos_modes)) and np.all(np.isfinite(sin_modes))):
            raise ContractError("Fourier coefficients must be finite")
        object.__setattr__(self, "zero_mode", zero_mode)
        object.__setattr__(self, "cos_modes", cos_modes)
        object.__setattr__(self, "sin_modes", sin_modes)

    @property
    def N(self):
        return self.cos_modes.size

    @classmethod
    def zeros(cls, N):
        return cls(0.0, np.zeros(N), np.zeros(N))

    def to_vector(self):
        """Pack as ``[a0, a_1..a_N, b_1..b_N]``."""
        return np.concatenate(([self.zero_mode], self.cos_modes, self.sin_modes))

    @classmethod
    def from_vector(cls, vec):
        vec = np.asarray(vec, dtype=np.float64)
        if vec.ndim != 1 or vec.size < 3 or vec.size % 2 != 1:
            raise ContractError(f"packed coefficient vector must have odd length >= 3, got {vec.shape}")
        N = (vec.size - 1) // 2
        return cls(vec[0], vec[1 : N + 1].copy(), vec[N + 1 :].copy())

    def allclose(self, other, atol=1e-13, rtol=0.0):
        return self.N == other.N and np.allclose(self.to_vector(), other.to_vector(), atol=atol, rtol=rtol)


def _check_coeffs(coeffs, grid):
    if coeffs.N != grid.N:
        raise ContractError(f"coefficients carry N={coeffs.N} modes but grid has N={grid.N}")


def _check_samples(samples, grid):
    samples = np.asarray(samples, dtype=np.float64)
    if samples.shape != (grid.J,):
        raise ContractError(f"field must have shape ({grid.J},), got {samples.shape}")
    if not np.all(np.isfinite(samples)):
        raise ContractError("field samples must be finite")
    return samples


# Array-level kernels. The stepper calls these directly to skip per-sweep validation.


def synth_arrays(a0, a, b, J):
    N = a.size
    spec = np.zeros(J // 2 + 1, dtype=np.complex128)
    spec[0] = J * a0
    spec[1 : N + 1] = (0.5 * J) * (a - 1j * b)
    return np.fft.irfft(spec, n=J)


def analyze_arrays(samples, N):
    J = samples.size
    spec = np.fft.rfft(samples)
    scale = 2.0 / J
    return spec[0].real / J, scale * spec[1 : N + 1].real, -scale * spec[1 : N + 1].imag


def _synth_direct(a0, a, b, grid):
    phase = np.outer(grid.x_points, grid.wavenumbers)
    return a0 + np.cos(phase) @ a + np.sin(phase) @ b


def _analyze_direct(samples, grid):
    phase = np.outer(grid.wavenumbers, grid.x_points)
    J = grid.J
    return samples.sum() / J, (2.0 / J) * (np.cos(phase) @ samples), (2.0 / J) * (np.sin(phase) @ samples)


def synthesize(coeffs, grid, method="fft"):
    """Evaluate the truncated series at the grid's collocation points.

    ``method="direct"`` uses the O(NJ) cosine/sine sum and serves as the
    reference for the FFT path.
    """
    _check_coeffs(coeffs, grid)
    if method == "fft":
        return synth_arrays(coeffs.zero_mode, coeffs.cos_modes, coeffs.sin_modes, grid.J)
    if method == "direct":
        return _synth_direct(coeffs.zero_mode, coeffs.cos_modes, coeffs.sin_modes, grid)
    raise ValueError(f"unknown method {method!r}")


def analyze(field, grid, method="fft"):
    """Quadrature Fourier coefficients of grid samples, truncated to ``grid.N`` modes."""
    if grid.J < 2 * grid.N + 1:
        raise AliasingError(f"J={grid.J} < 2N+1={2 * grid.N + 1}")
    samples = _check_samples(field, grid)
    if method == "fft":
        return RealCoeffs(*analyze_arrays(samples, grid.N))
    if method == "direct":
        return RealCoeffs(*_analyze_direct(samples, grid))
    raise ValueError(f"unknown method {method!r}")


def derivative(coeffs, grid):
    """Coefficients of d/dx of the series."""
    _check_coeffs(coeffs, grid)
    k = grid.wavenumbers
    return RealCoeffs(0.0, k * coeffs.sin_modes, -k * coeffs.cos_modes)

"""Fourier-spectral theta-scheme solver for periodic 1-D Klein-Gordon-type equations."""

from .elliptic import complete_elliptic_k, jacobi_sn_cn_dn
from .errors import (
    AliasingError,
    ContractError,
    DivergenceError,
    DomainError,
    NonConvergenceError,
    UnsupportedDiagnosticError,
)
from .problems import Nonlinearity, ProblemSpec, linear_kg, sine_gordon, custom_polynomial
from .spectral import GridSpec, RealCoeffs, analyze, synthesize
from .stepper import SolverParams, SpectralState, StepReport, evolve, initial_state, step

__version__ = "0.1.0"

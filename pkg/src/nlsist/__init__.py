"""Numerical inverse scattering for the defocusing nonlinear Schrodinger equation.

Modules
-------
spectral     grids, sampled functions, Fourier and Cauchy/Hilbert operators
scattering   Jost solutions, scattering coefficients, reflection, trace integral
inverse      jump data and the singular integral equation, potential recovery
asymptotics  nu, alpha, the delta function and the long-time formula
oracle       split-step Fourier integrator and the asymptotic comparison
verify       verification suites and slope fits
cli          the ``nls`` command
"""

from .asymptotics import (
    AsymptoticParams,
    DeltaEval,
    alpha,
    delta,
    nu,
    oscillatory_decay_probe,
    q_asymptotic,
    stationary_point,
)
from .config import RunConfig
from .inverse import (
    JumpData,
    ReconstructionResult,
    SolverError,
    apply_Cw,
    build_jump,
    evolve_reflection,
    reconstruct_potential,
    solve_mu,
)
from .oracle import FieldState, StepperConfig, compare_asymptotics, split_step_evolve
from .scattering import (
    Potential,
    ScatteringData,
    ScatteringError,
    box_scattering,
    reflection,
    scattering_coefficients,
    solve_jost,
    trace_integral,
)
from .spectral import (
    SampledFn,
    SampledMatrixFn,
    TruncationWarning,
    UniformGrid,
    cauchy_boundary,
    cauchy_offcontour,
    fourier_pair,
    hilbert,
)
from .verify import VerifyReport, fit_slope, verify_suite

__version__ = "0.1.0"

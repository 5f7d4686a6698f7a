"""High-order Gautschi-type exponential wave integrators for the Klein-Gordon equation.

Solves ``eps^2 u_tt - u_xx + u / eps^2 + f(u) = 0`` on a periodic interval
with a Fourier pseudospectral discretization in space and symmetric
exponential wave integrators of order 2, 4 or 6 in time.  A classical RK4
method-of-lines solver is included for comparison.
"""
__version__ = "0.1.0"

from .ewi import (
    DerivativeBundle,
    InstabilityError,
    StabilityWarning,
    StepPair,
    first_step,
    integrate,
    main_step,
    march,
    nonlinearity_time_derivatives,
    time_derivatives_of_u,
)
from .grid import (
    GridSpec,
    build_grid,
    embed,
    forward_dft,
    h1_norm,
    inverse_dft,
    spectral_derivative,
)
from .kernels import BACKEND
from .problem import (
    ConstantNonlinearity,
    CubicNonlinearity,
    FunctionNonlinearity,
    InitialData,
    KGEProblem,
    Nonlinearity,
    PolynomialNonlinearity,
    SolverState,
    cosine,
    energy,
    gaussian,
    initial_state,
    preset,
    zero,
)
from .rk4 import integrate_rk4, rk4_rhs
from .weights import (
    MomentTable,
    WeightTable,
    build_weight_table,
    mode_frequencies,
    moment_integrals,
    scaled_moments,
)

__all__ = [
    "__version__",
    "BACKEND",
    "GridSpec",
    "build_grid",
    "forward_dft",
    "inverse_dft",
    "spectral_derivative",
    "h1_norm",
    "embed",
    "Nonlinearity",
    "PolynomialNonlinearity",
    "CubicNonlinearity",
    "ConstantNonlinearity",
    "FunctionNonlinearity",
    "InitialData",
    "gaussian",
    "cosine",
    "zero",
    "preset",
    "KGEProblem",
    "SolverState",
    "initial_state",
    "energy",
    "MomentTable",
    "WeightTable",
    "mode_frequencies",
    "scaled_moments",
    "moment_integrals",
    "build_weight_table",
    "InstabilityError",
    "StabilityWarning",
    "StepPair",
    "DerivativeBundle",
    "time_derivatives_of_u",
    "nonlinearity_time_derivatives",
    "first_step",
    "main_step",
    "march",
    "integrate",
    "integrate_rk4",
    "rk4_rhs",
]

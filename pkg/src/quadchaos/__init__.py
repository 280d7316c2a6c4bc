"""Concentration bounds for Gaussian quadratic chaos.

Evaluates, optimizes and cross-compares tail bounds on
``Pr(x^T A x - Tr(A) > t)`` for a standard Gaussian vector ``x`` and a
symmetric matrix ``A``, and checks them against seeded Monte-Carlo estimates.
"""

__version__ = "0.1.0"

from .errors import (
    QuadChaosError,
    DomainError,
    DimensionError,
    InvalidValueError,
    ConvergenceError,
    NumericalError,
)
from .config import Tolerances, tolerances, use_tolerances
from .spectral import (
    SymmetricMatrix,
    SpectralSummary,
    symmetrize,
    eigendecompose,
    spectral_summary,
    load_matrix_csv,
)
from .scalar import (
    Bracket,
    HwConstants,
    hw_constants,
    theta_m,
    solve_root,
    minimize_1d,
    chi2_cdf,
    chi2_sf,
    chi2_cdf_even,
)
from .bounds import BoundName, BoundValue, evaluate

__all__ = [
    "__version__",
    "QuadChaosError",
    "DomainError",
    "DimensionError",
    "InvalidValueError",
    "ConvergenceError",
    "NumericalError",
    "Tolerances",
    "tolerances",
    "use_tolerances",
    "SymmetricMatrix",
    "SpectralSummary",
    "symmetrize",
    "eigendecompose",
    "spectral_summary",
    "load_matrix_csv",
    "Bracket",
    "HwConstants",
    "hw_constants",
    "theta_m",
    "solve_root",
    "minimize_1d",
    "chi2_cdf",
    "chi2_sf",
    "chi2_cdf_even",
    "BoundName",
    "BoundValue",
    "evaluate",
]

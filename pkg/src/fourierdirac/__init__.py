"""Fredholm determinants of truncated cosine/sine transforms, the associated
Dirac and Schrodinger systems in u = log a, and their scattering matrices."""

from .magnus import BACKEND
from .operators import (
    DeterminantRecord,
    DiscretizedOperator,
    KernelKind,
    det_sweep,
    dyson_potential,
    fredholm_dets,
    kernel_matrix,
)
from .phi_solver import (
    MuValue,
    PhiSolution,
    identity_residuals,
    jost_integral,
    mu,
    phi_eval,
    phisys_residual,
    solve_phi,
)
from .specfun import (
    CriticalPoint,
    QuadratureGrid,
    chi_minus,
    chi_plus,
    gauss_legendre,
    log_gamma,
    spectral_density,
)

__version__ = "0.1.0"

__all__ = [
    "BACKEND",
    "CriticalPoint",
    "DeterminantRecord",
    "DiscretizedOperator",
    "KernelKind",
    "MuValue",
    "PhiSolution",
    "QuadratureGrid",
    "chi_minus",
    "chi_plus",
    "det_sweep",
    "dyson_potential",
    "fredholm_dets",
    "gauss_legendre",
    "identity_residuals",
    "jost_integral",
    "kernel_matrix",
    "log_gamma",
    "mu",
    "phi_eval",
    "phisys_residual",
    "solve_phi",
    "spectral_density",
]

"""Sturm-Liouville spectra on (0, pi) with separated boundary conditions:
a forward eigensolver driven by the polar phase, a shooting solver for the
cubic nonlinear boundary value problem with prescribed interior zero
counts, and the inverse eigenvalue-placement problem solved both in closed
form and by constrained optimization, each certifying the other.
"""

from .core import (
    PI,
    BoundaryAngle,
    DIRICHLET,
    NEUMANN,
    Grid,
    GridFunction,
    GridMismatchError,
    Potential,
    as_angle,
    grid_function_from_csv,
    l2_inner,
    l2_norm,
    load_csv,
    make_grid,
    potential_from_csv,
    potential_from_values,
    preset_potential,
    resample_potential,
    save_csv,
    simpson_weights,
    sup_norm,
)
from .eigen import (
    BracketingError,
    ConvergenceError,
    Eigenpair,
    PhaseTrace,
    eigenfunction,
    eigenvalue,
    eigenvalue_gradient,
    fd_eigenvalues,
    ode_residual,
    phase_target,
    prufer_phase,
    spectrum,
)
from .nonlinear import (
    MissingBranchError,
    NonlinearSolution,
    NotFound,
    ScanReport,
    ShotResult,
    count_sign_changes,
    default_s_grid,
    find_solution,
    multiplicity_scan,
    nonexistence_scan,
    resubstitution_defect,
    shoot,
)
from .inverse import (
    InverseResult,
    OptimizerOptions,
    ReconstructionError,
    local_optimality_probe,
    optimality_residual,
    save_result,
    solve_direct,
    solve_explicit,
    verify_nodal,
)

__version__ = "0.1.0"

__all__ = [
    "PI",
    "BoundaryAngle",
    "DIRICHLET",
    "NEUMANN",
    "Grid",
    "GridFunction",
    "GridMismatchError",
    "Potential",
    "as_angle",
    "grid_function_from_csv",
    "l2_inner",
    "l2_norm",
    "load_csv",
    "make_grid",
    "potential_from_csv",
    "potential_from_values",
    "preset_potential",
    "resample_potential",
    "save_csv",
    "simpson_weights",
    "sup_norm",
    "BracketingError",
    "ConvergenceError",
    "Eigenpair",
    "PhaseTrace",
    "eigenfunction",
    "eigenvalue",
    "eigenvalue_gradient",
    "fd_eigenvalues",
    "ode_residual",
    "phase_target",
    "prufer_phase",
    "spectrum",
    "MissingBranchError",
    "NonlinearSolution",
    "NotFound",
    "ScanReport",
    "ShotResult",
    "count_sign_changes",
    "default_s_grid",
    "find_solution",
    "multiplicity_scan",
    "nonexistence_scan",
    "resubstitution_defect",
    "shoot",
    "InverseResult",
    "OptimizerOptions",
    "ReconstructionError",
    "local_optimality_probe",
    "optimality_residual",
    "save_result",
    "solve_direct",
    "solve_explicit",
    "verify_nodal",
    "__version__",
]

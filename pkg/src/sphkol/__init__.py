"""Pseudospectral solver for the vorticity dynamics around the two-jet zonal
flow on the unit sphere, with the reduced degree-2 system, rotating-frame
equivalence, and the integral-identity oracle suites."""

from .harmonics import (
    HarmonicIndex,
    QuadratureGrid,
    build_grid,
    eval_plm,
    eval_ynm,
    gauss_legendre,
    harmonic_indices,
    recurrence_coeff,
)
from .operators import (
    KillingParams,
    convection,
    gradient,
    inverse_laplacian,
    killing_advect,
    killing_degree2_matrix,
    killing_identity_residual,
    killing_pairing_residuals,
    laplacian,
    laplacian_power,
    perturbation_operator,
    velocity_from_vorticity,
)
from .pde_solver import (
    IntegrationError,
    SolverConfig,
    TrajectoryRecord,
    default_dt,
    rhs_one_jet,
    rhs_two_jet,
    run,
    run_with_coupling,
    step,
    write_trajectory_csv,
)
from .reduced_ode import (
    MODE2_ORDER,
    ReducedSystem,
    build_system,
    equilibrium_closed_form,
    equilibrium_solve,
    extract_coupling,
    propagate_exact,
    propagate_forced,
)
from .rotating import RotatingConfig, coriolis_term, frame_map, rotating_equilibrium, run_rotating
from .sht import (
    GridField,
    MeanModeError,
    SpectralField,
    TangentGridField,
    analyze,
    random_real_field,
    synthesize,
)

__version__ = "0.1.0"

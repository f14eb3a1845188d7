"""Numerical toolkit for standing waves of nonlinear Klein-Gordon-Maxwell systems.

The package solves the coupled elliptic system for a radial matter field u and
electrostatic potential phi,

    -u'' - (2/r) u' + [m^2 - (e*phi - omega)^2] u = f'(u),
    phi'' + (2/r) phi' = e (e*phi - omega) u^2,

on a truncated radial domain, by eliminating phi (the electrostatic equation
has a unique solution phi_u for every u) and hunting critical points of the
reduced energy of u with mountain-pass and Nehari-manifold descent.  Parameter
continuations cover the frequency window omega < m as well as the zero-mass
limit omega = m, and a thresholds module evaluates the coefficient algebra
that delimits the existence region in the (p, omega/m) plane.
"""

from .model import (
    DoublePower,
    Field,
    FieldNorms,
    ModelParams,
    Power,
    RadialGrid,
    eval_f,
    field_from_function,
    field_norms,
    gradient_seminorm,
    integrate,
    make_grid,
    verify_f_hypotheses,
)
from .phi_reduction import PhiSolution, electrostatic_identity_gap, solve_phi
from .energy import (
    EnergyBreakdown,
    EnergyMode,
    IdentityResiduals,
    boundedness_certificate,
    dilation_combination,
    gradient_norm,
    nehari_residual,
    pohozaev_residual,
    reduced_energy,
    reduced_gradient,
    two_field_action,
)
from .thresholds import (
    CoefficientTriple,
    Region,
    ThresholdReport,
    admissible_alpha_interval,
    check_quadratic_nonneg,
    classify_existence,
    coefficients,
    critical_ratio_sq,
    find_alpha,
    min_critical_ratio_sq,
    threshold_curve,
    threshold_curve_legacy,
    threshold_report,
)
from .variational_solver import (
    ContinuationStep,
    ContinuationTrace,
    SeedProfile,
    SolutionReport,
    SolverOptions,
    StepRule,
    epsilon_continuation,
    lambda_continuation,
    mountain_pass_solve,
    nehari_descent,
    shoot_scalar_field,
    shoot_scalar_profile,
    solve,
)

__version__ = "0.1.0"

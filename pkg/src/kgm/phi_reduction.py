"""Reduction map u -> phi_u: the electrostatic potential generated by u.

For a fixed matter field u the potential solves the linear elliptic problem

    phi'' + (2/r) phi' - e^2 u^2 phi = -e*omega*u^2,   phi'(0) = 0,  phi(r_max) = 0,

whose discrete form is the stationarity condition, over fields vanishing at
the outer node, of

    J(phi) = 1/2 ||grad phi||^2 + (e^2/2) int u^2 phi^2 - e*omega int u^2 phi.

J is a strictly convex quadratic, so the tridiagonal system below has exactly
one solution and a direct banded Cholesky solve reproduces it bitwise on
repeated calls.  Because the discrete equation is the exact stationarity of
J, the weak-form identity

    int |grad phi_u|^2 + e^2 int u^2 phi_u^2 = e*omega int u^2 phi_u

holds to rounding, and the discrete operator is an M-matrix, which forces
0 <= phi_u <= omega/e nodewise (checked, never clamped).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.linalg import solveh_banded

from .errors import BoundsViolated, NonFiniteInput
from .model import Field, ModelParams, RadialGrid, _dirichlet_energy

__all__ = ["PhiSolution", "solve_phi", "electrostatic_identity_gap"]

_BOUNDS_TOL = 1e-10


@dataclass(frozen=True)
class PhiSolution:
    """Solved potential with its residual diagnostics.

    ``linear_residual`` is the max-norm residual of the discrete linear
    system (relative to the right-hand side scale); ``identity_gap`` is the
    weak-form energy identity tested against phi itself.
    """

    phi: Field
    linear_residual: float
    identity_gap: float


def _phi_values(grid: RadialGrid, u_vals: np.ndarray, params: ModelParams) -> np.ndarray:
    """Solve the tridiagonal system for the n-1 interior unknowns."""
    n = grid.n
    h = grid.h
    coef = 4.0 * np.pi / (h * h)
    m = grid.seg_moments
    w = grid.weights
    usq = u_vals * u_vals

    diag = np.empty(n - 1)
    diag[0] = coef * m[0]
    diag[1:] = coef * (m[: n - 2] + m[1 : n - 1])
    diag += params.e**2 * w[: n - 1] * usq[: n - 1]
    upper = -coef * m[: n - 2]
    rhs = params.e * params.omega * w[: n - 1] * usq[: n - 1]

    ab = np.zeros((2, n - 1))
    ab[0, 1:] = upper
    ab[1, :] = diag
    interior = solveh_banded(ab, rhs, lower=False)

    phi = np.zeros(n)
    phi[: n - 1] = interior
    return phi


def solve_phi(u: Field, params: ModelParams) -> PhiSolution:
    """Compute the unique potential phi_u for the given matter field."""
    if not np.isfinite(u.values).all():
        raise NonFiniteInput("matter field contains non-finite samples")
    grid = u.grid
    phi = _phi_values(grid, u.values, params)

    # residual of the full discrete equation on the interior rows
    from .model import stiffness_matvec

    w = grid.weights
    usq = u.values * u.values
    res = stiffness_matvec(grid, phi) + params.e**2 * w * usq * phi - params.e * params.omega * w * usq
    scale = max(1.0, float(np.abs(params.e * params.omega * w * usq).max(initial=0.0)))
    linear_residual = float(np.abs(res[: grid.n - 1]).max(initial=0.0)) / scale

    if params.e > 0.0:
        ceiling = params.omega / params.e
        lo = float(phi.min())
        hi = float(phi.max())
        if lo < -_BOUNDS_TOL or hi > ceiling + _BOUNDS_TOL:
            raise BoundsViolated(
                f"phi range [{lo:.3e}, {hi:.3e}] leaves [0, {ceiling:.3e}]"
            )

    phi_field = Field(grid, phi)
    gap = electrostatic_identity_gap(u, phi_field, params)
    return PhiSolution(phi=phi_field, linear_residual=linear_residual, identity_gap=gap)


def electrostatic_identity_gap(u: Field, phi: Field, params: ModelParams) -> float:
    """Weak-form energy identity of the electrostatic equation tested on phi.

    Returns |  ||grad phi||^2 + e^2 int u^2 phi^2 - e*omega int u^2 phi  |
    normalized by max(1, e*omega int u^2 phi).  Zero (to rounding) exactly
    when phi is the solved potential of u.
    """
    w = u.grid.weights
    usq = u.values * u.values
    grad_sq = _dirichlet_energy(u.grid, phi.values)
    coupling = params.e**2 * float(w @ (usq * phi.values * phi.values))
    source = params.e * params.omega * float(w @ (usq * phi.values))
    return abs(grad_sq + coupling - source) / max(1.0, abs(source))


def refinement_ratio(profile, params: ModelParams, n: int, r_max: float) -> float:
    """Successive-refinement error ratio of the potential solve.

    Samples the analytic matter profile on grids with n, 2n, and 4n nodes,
    solves for the potential on each, and returns

        || phi_n - phi_2n ||_w / || phi_2n - phi_4n ||_w

    over shared nodes in the weighted L2 norm.  A second-order scheme gives a
    ratio near 4.
    """
    from .model import make_grid

    phis = {}
    grids = {}
    for k in (n, 2 * n, 4 * n):
        grid = make_grid(k, r_max)
        u = Field(grid, np.asarray(profile(grid.nodes), dtype=float))
        phis[k] = solve_phi(u, params).phi.values
        grids[k] = grid

    d1 = phis[n] - phis[2 * n][1::2]
    d2 = phis[2 * n] - phis[4 * n][1::2]
    e1 = float(np.sqrt(grids[n].weights @ (d1 * d1)))
    e2 = float(np.sqrt(grids[2 * n].weights @ (d2 * d2)))
    return e1 / e2

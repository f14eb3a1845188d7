"""Reduced energy functionals, their gradients, and identity diagnostics.

With the potential eliminated through the reduction map u -> phi_u, critical
points of the reduced energy solve the full coupled system.  Two families are
covered, selected by :class:`EnergyMode`:

* standard mode (homogeneous f, exponent p, homotopy weight lam in [delta, 1]):

      I_lam(u) = 1/2 int |grad u|^2 + Omega u^2 + e*omega*phi_u u^2
                 - (lam/p) int |u|^p,     Omega = m^2 - omega^2;

* zero-mass mode (omega = m, regularization eps >= 0, inhomogeneous f):

      I_eps(u) = 1/2 int |grad u|^2 + eps u^2 + e*omega*phi_u u^2 - int f(u).

Because phi_u is the exact stationary point of the discrete two-field action
in phi, the envelope theorem makes the discrete Gateaux derivative exact:

    I'(u)[v] = int grad u . grad v + [Omega or eps] u v
               + (2 e*omega*phi_u - e^2 phi_u^2) u v - f'(u) v,

which is what :func:`reduced_gradient` returns as a nodal residual field.
The Nehari and dilation (Pohozaev-type) combinations of the same integrals
are exposed as normalized residuals; both vanish at critical points, and the
dilation combination additionally satisfies, for any radial u,

    d/ds I(u(./s)) |_{s=1} = 1/2 * (dilation combination),

which the test suite uses as an independent finite-difference oracle.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .errors import AlphaOutOfRange, ZeroField
from .model import (
    DoublePower,
    Field,
    ModelParams,
    Power,
    _dirichlet_energy,
    eval_f,
    stiffness_matvec,
)
from .phi_reduction import solve_phi

__all__ = [
    "EnergyMode",
    "EnergyBreakdown",
    "IdentityResiduals",
    "reduced_energy",
    "reduced_gradient",
    "gradient_norm",
    "nehari_residual",
    "pohozaev_residual",
    "dilation_combination",
    "boundedness_certificate",
    "two_field_action",
]


@dataclass(frozen=True)
class EnergyMode:
    """Functional selector: ('standard', lam) or ('zero_mass', eps)."""

    kind: str
    value: float

    @staticmethod
    def standard(lam: float = 1.0) -> "EnergyMode":
        if not 0.0 < lam <= 1.0:
            raise ValueError(f"homotopy weight lam={lam} outside (0, 1]")
        return EnergyMode("standard", lam)

    @staticmethod
    def zero_mass(eps: float) -> "EnergyMode":
        if eps < 0.0:
            raise ValueError(f"regularization eps={eps} must be >= 0")
        return EnergyMode("zero_mass", eps)


@dataclass(frozen=True)
class EnergyBreakdown:
    """Additive pieces of the reduced energy.

    total = kinetic + mass_term + interaction - potential, where kinetic is
    1/2 ||grad u||^2, mass_term is (Omega/2) int u^2 (eps in zero-mass mode),
    interaction is (e*omega/2) int phi_u u^2, and potential is the f-integral
    (lam/p int |u|^p in standard mode).
    """

    kinetic: float
    mass_term: float
    interaction: float
    potential: float
    total: float


@dataclass(frozen=True)
class IdentityResiduals:
    """Normalized residuals of the stationarity identities at a field."""

    nehari: float
    pohozaev: float
    gradient_norm: float


def _mass_coefficient(params: ModelParams, mode: EnergyMode) -> float:
    if mode.kind == "standard":
        return params.Omega
    return mode.value


def _check_mode(params: ModelParams, mode: EnergyMode):
    if mode.kind == "standard":
        if not isinstance(params.nonlinearity, Power):
            raise ValueError("standard mode requires the homogeneous Power nonlinearity")
    elif mode.kind == "zero_mass":
        if not isinstance(params.nonlinearity, DoublePower):
            raise ValueError("zero-mass mode requires the DoublePower nonlinearity")
    else:
        raise ValueError(f"unknown energy mode {mode.kind!r}")


def _potential_terms(params: ModelParams, mode: EnergyMode, vals: np.ndarray):
    """(density of the potential term, its derivative) including lam weight."""
    f, fp = eval_f(params.nonlinearity, vals)
    if mode.kind == "standard":
        return mode.value * f, mode.value * fp
    return f, fp


def _phi_for(u: Field, params: ModelParams, phi: Optional[Field]) -> Field:
    return phi if phi is not None else solve_phi(u, params).phi


def reduced_energy(
    u: Field, params: ModelParams, mode: EnergyMode, phi: Optional[Field] = None
) -> EnergyBreakdown:
    """Evaluate the reduced energy of u, solving for phi_u internally.

    A precomputed ``phi`` may be passed to reuse a potential solve; it must
    be the solved potential of this exact u.
    """
    _check_mode(params, mode)
    grid = u.grid
    w = grid.weights
    vals = u.values
    phi_vals = _phi_for(u, params, phi).values

    kinetic = 0.5 * _dirichlet_energy(grid, vals)
    usq = vals * vals
    mass_term = 0.5 * _mass_coefficient(params, mode) * float(w @ usq)
    interaction = 0.5 * params.e * params.omega * float(w @ (phi_vals * usq))
    fdens, _ = _potential_terms(params, mode, vals)
    potential = float(w @ fdens)
    total = kinetic + mass_term + interaction - potential
    return EnergyBreakdown(
        kinetic=kinetic,
        mass_term=mass_term,
        interaction=interaction,
        potential=potential,
        total=total,
    )


def reduced_gradient(
    u: Field, params: ModelParams, mode: EnergyMode, phi: Optional[Field] = None
) -> Field:
    """Nodal residual of the Euler-Lagrange equation of the reduced energy.

    The weighted pairing sum_i w_i G_i v_i reproduces the Gateaux derivative
    I'(u)[v] exactly in the discrete setting (the potential term contributes
    (2 e*omega*phi - e^2 phi^2) u through the envelope theorem).
    """
    _check_mode(params, mode)
    grid = u.grid
    vals = u.values
    phi_vals = _phi_for(u, params, phi).values

    stiff = stiffness_matvec(grid, vals) / grid.weights
    mass = _mass_coefficient(params, mode) * vals
    coupling = (2.0 * params.e * params.omega * phi_vals - (params.e * phi_vals) ** 2) * vals
    _, fp = _potential_terms(params, mode, vals)
    return Field(grid, stiff + mass + coupling - fp)


def gradient_norm(g: Field) -> float:
    """Weighted L2 norm of a nodal residual field over the solution unknowns.

    The outer node carries the Dirichlet condition, so its entry in the
    residual field is the boundary reaction force rather than an equation
    residual; it is excluded from the norm.
    """
    w = g.grid.weights[:-1]
    v = g.values[:-1]
    return math.sqrt(float(w @ (v * v)))


def nehari_residual(
    u: Field, params: ModelParams, mode: EnergyMode, phi: Optional[Field] = None
) -> float:
    """Normalized residual of the Nehari identity <I'(u), u> = 0.

    |LHS - RHS| / max(1, RHS) with
    LHS = int |grad u|^2 + [Omega|eps] u^2 + 2 e*omega*phi u^2 - e^2 phi^2 u^2
    and RHS = int f'(u) u (lam-weighted in standard mode).
    """
    _check_mode(params, mode)
    if not np.any(u.values):
        raise ZeroField("Nehari residual needs a nonzero field")
    grid = u.grid
    w = grid.weights
    vals = u.values
    phi_vals = _phi_for(u, params, phi).values
    usq = vals * vals

    lhs = (
        _dirichlet_energy(grid, vals)
        + _mass_coefficient(params, mode) * float(w @ usq)
        + float(w @ ((2.0 * params.e * params.omega * phi_vals - (params.e * phi_vals) ** 2) * usq))
    )
    _, fp = _potential_terms(params, mode, vals)
    rhs = float(w @ (fp * vals))
    return abs(lhs - rhs) / max(1.0, abs(rhs))


def _pohozaev_combination(
    u: Field, params: ModelParams, mode: EnergyMode, phi: Optional[Field]
) -> tuple[float, float]:
    """(signed dilation combination, magnitude scale of its terms).

    On the truncated ball the dilation test of the electrostatic equation
    picks up the Dirichlet boundary flux 4*pi*R^3*phi'(R)^2, because the
    potential decays only like 1/r; the combination includes that term so it
    vanishes at solutions of the truncated problem up to discretization error
    (the matter field's own flux is exponentially small and neglected).
    """
    grid = u.grid
    w = grid.weights
    vals = u.values
    phi_vals = _phi_for(u, params, phi).values
    usq = vals * vals

    grad_sq = _dirichlet_energy(grid, vals)
    mass = _mass_coefficient(params, mode) * float(w @ usq)
    inter = params.e * params.omega * float(w @ (phi_vals * usq))
    inter2 = float(w @ ((params.e * phi_vals) ** 2 * usq))
    fdens, _ = _potential_terms(params, mode, vals)
    pot = float(w @ fdens)
    dphi_R = (phi_vals[-1] - phi_vals[-2]) / grid.h
    flux = 4.0 * math.pi * grid.r_max**3 * dphi_R * dphi_R

    combo = grad_sq + 3.0 * mass + 5.0 * inter - 2.0 * inter2 - 6.0 * pot - flux
    scale = (
        abs(grad_sq)
        + 3.0 * abs(mass)
        + 5.0 * abs(inter)
        + 2.0 * abs(inter2)
        + 6.0 * abs(pot)
        + abs(flux)
    )
    return combo, scale


def pohozaev_residual(
    u: Field, params: ModelParams, mode: EnergyMode, phi: Optional[Field] = None
) -> float:
    """Normalized dilation identity residual.

    The combination int |grad u|^2 + 3*[Omega|eps] u^2 + 5 e*omega*phi u^2
    - 2 e^2 phi^2 u^2 - 6*potential - boundary flux vanishes at critical
    points (it equals 2 d/ds I(u(./s)) at s=1); the residual is
    |combination| normalized by max(1, sum of the magnitudes of its terms).
    """
    _check_mode(params, mode)
    if not np.any(u.values):
        raise ZeroField("Pohozaev residual needs a nonzero field")
    combo, scale = _pohozaev_combination(u, params, mode, phi)
    return abs(combo) / max(1.0, scale)


def dilation_combination(
    u: Field, params: ModelParams, mode: EnergyMode, phi: Optional[Field] = None
) -> float:
    """Signed value of the dilation combination (for oracle cross-checks)."""
    _check_mode(params, mode)
    combo, _ = _pohozaev_combination(u, params, mode, phi)
    return combo


def boundedness_certificate(
    u: Field,
    params: ModelParams,
    lam: float,
    alpha: float,
    phi: Optional[Field] = None,
) -> float:
    """Coercive combination of the level, Nehari, and dilation identities.

    Returns ((p - 2*alpha*p - 2 + 12*alpha)/(2p)) ||grad u||^2
    + int [C*Omega + B*e*omega*phi + A*e^2*phi^2] u^2 with the certificate
    coefficients A, B, C of the thresholds module.  At a critical point of
    I_lam at level c this quantity is bounded by c, which continuations use
    as a runtime monitor (lam records the level being monitored).
    """
    from .thresholds import admissible_alpha_interval, coefficients

    if not isinstance(params.nonlinearity, Power):
        raise ValueError("boundedness certificate applies to the homogeneous case")
    if not 0.0 < lam <= 1.0:
        raise ValueError(f"lam={lam} outside (0, 1]")
    p = params.nonlinearity.p
    lo, hi = admissible_alpha_interval(p)
    if not lo < alpha < hi:
        raise AlphaOutOfRange(f"alpha={alpha} outside ({lo}, {hi}) for p={p}")

    trip = coefficients(p, alpha)
    grid = u.grid
    w = grid.weights
    vals = u.values
    phi_vals = _phi_for(u, params, phi).values
    usq = vals * vals

    grad_coef = (p - 2.0 * alpha * p - 2.0 + 12.0 * alpha) / (2.0 * p)
    zero_order = (
        trip.c * params.Omega
        + trip.b * params.e * params.omega * phi_vals
        + trip.a * (params.e * phi_vals) ** 2
    )
    return grad_coef * _dirichlet_energy(grid, vals) + float(w @ (zero_order * usq))


def two_field_action(
    u: Field, phi: Field, params: ModelParams, mode: EnergyMode
) -> float:
    """Action of the full (u, phi) pair, without reduction.

    S(u, phi) = 1/2 int |grad u|^2 - |grad phi|^2
                + [Omega|eps] u^2 + (2 e*omega*phi - e^2 phi^2) u^2
                - potential(u).

    Evaluated at phi = phi_u this equals the reduced energy by the weak-form
    electrostatic identity; the equality is a cross-check of the reduction,
    not an optimization target (S is strongly indefinite).
    """
    _check_mode(params, mode)
    grid = u.grid
    w = grid.weights
    vals = u.values
    usq = vals * vals
    phi_vals = phi.values

    kinetic_u = _dirichlet_energy(grid, vals)
    kinetic_phi = _dirichlet_energy(grid, phi_vals)
    quad = _mass_coefficient(params, mode) * float(w @ usq) + float(
        w @ ((2.0 * params.e * params.omega * phi_vals - (params.e * phi_vals) ** 2) * usq)
    )
    fdens, _ = _potential_terms(params, mode, vals)
    return 0.5 * (kinetic_u - kinetic_phi + quad) - float(w @ fdens)

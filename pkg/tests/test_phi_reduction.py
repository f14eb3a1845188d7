import numpy as np
import pytest

from conftest import random_bump
from kgm.errors import NonFiniteInput
from kgm.model import Field, ModelParams, Power, integrate
from kgm.phi_reduction import electrostatic_identity_gap, refinement_ratio, solve_phi


def test_zero_field_gives_zero_potential(grid_small, params_p3):
    sol = solve_phi(Field(grid_small, np.zeros(grid_small.n)), params_p3)
    assert np.abs(sol.phi.values).max() == 0.0
    assert sol.linear_residual == 0.0
    assert sol.identity_gap == 0.0


def test_bounds_hold_nodewise(grid_small, params_p3, rng):
    ceiling = params_p3.omega / params_p3.e
    for _ in range(20):
        u = random_bump(grid_small, rng)
        phi = solve_phi(u, params_p3).phi.values
        assert phi.min() >= -1e-10
        assert phi.max() <= ceiling + 1e-10


def test_linear_residual_small(grid_small, params_p3, rng):
    u = random_bump(grid_small, rng)
    sol = solve_phi(u, params_p3)
    assert sol.linear_residual < 1e-10


def test_identity_gap_at_solution_and_perturbed(grid_small, params_p3, rng):
    u = random_bump(grid_small, rng)
    sol = solve_phi(u, params_p3)
    assert sol.identity_gap < 1e-12
    bumped = Field(grid_small, sol.phi.values + 0.01)
    assert electrostatic_identity_gap(u, bumped, params_p3) > sol.identity_gap


def test_solve_is_bitwise_deterministic(grid_small, params_p3, rng):
    u = random_bump(grid_small, rng)
    a = solve_phi(u, params_p3).phi.values
    b = solve_phi(u, params_p3).phi.values
    assert np.array_equal(a, b)


def test_interaction_charge_monotone_in_amplitude(grid_small, params_p3, rng):
    for _ in range(5):
        u1 = random_bump(grid_small, rng)
        u2 = Field(grid_small, 2.0 * u1.values)
        q1 = integrate(Field(grid_small, solve_phi(u1, params_p3).phi.values * u1.values**2))
        q2 = integrate(Field(grid_small, solve_phi(u2, params_p3).phi.values * u2.values**2))
        assert q2 >= q1 - 1e-12


def test_bound_saturation_from_below(grid_small, params_p3):
    base = np.exp(-grid_small.nodes**2) * 0.05
    base[-1] = 0.0
    ceiling = params_p3.omega / params_p3.e
    gaps = []
    for amp in (10.0, 100.0, 1000.0):
        phi = solve_phi(Field(grid_small, amp * base), params_p3).phi.values
        gaps.append(ceiling - phi.max())
    assert all(g >= -1e-10 for g in gaps)
    assert gaps[0] > gaps[1] > gaps[2] >= -1e-10


def test_refinement_ratio_second_order(params_p3):
    ratio = refinement_ratio(lambda r: 2.0 * np.exp(-(r**2) / 4.0), params_p3, 1000, 30.0)
    assert 3.5 <= ratio <= 4.5


def test_nonfinite_input_rejected(grid_small, params_p3):
    vals = np.zeros(grid_small.n)
    vals[0] = np.nan
    with pytest.raises(NonFiniteInput):
        solve_phi(Field(grid_small, vals), params_p3)


def test_decoupled_potential_vanishes(grid_small):
    params = ModelParams(m=1.0, omega=0.5, e=0.0, nonlinearity=Power(3.0))
    u = Field(grid_small, np.exp(-grid_small.nodes**2))
    sol = solve_phi(u, params)
    assert np.abs(sol.phi.values).max() == 0.0

import math

import numpy as np
import pytest

from conftest import random_bump
from kgm.energy import EnergyMode
from kgm.errors import CollapseToZero, ProjectionFailed
from kgm.model import DoublePower, Field, ModelParams, Power, make_grid
from kgm.variational_solver import (
    ContinuationStep,
    ContinuationTrace,
    SeedProfile,
    SolverOptions,
    _project_to_nehari,
    _Workspace,
    epsilon_continuation,
    lambda_continuation,
    mountain_pass_solve,
    nehari_descent,
    shoot_scalar_field,
    shoot_scalar_profile,
)


@pytest.fixture(scope="module")
def grid800():
    return make_grid(800, 30.0)


@pytest.fixture(scope="module")
def opts():
    return SolverOptions(grad_tol=1e-6, max_iters=30000)


# ------------------------------ shooting oracle ------------------------------

def test_shooting_profile_positive_decreasing():
    profile = shoot_scalar_profile(1.0, 4.0, 25.0)
    r = np.linspace(0.05, 25.0, 2000)
    u = profile(r)
    assert u.min() >= -1e-10
    assert np.all(np.diff(u) <= 1e-12)
    assert abs(u[-1]) < 1e-8


def test_shooting_boundary_decay(grid800):
    f = shoot_scalar_field(0.75, 3.0, grid800)
    assert abs(f.values[-1]) < 1e-8


def test_shooting_scaling_law():
    # u_Omega(r) = Omega^{1/(p-2)} u_1(sqrt(Omega) r) for p = 4, Omega = 4
    p1 = shoot_scalar_profile(1.0, 4.0, 22.0)
    p4 = shoot_scalar_profile(4.0, 4.0, 11.0)
    r = np.linspace(0.05, 10.5, 500)
    lhs = p4(r)
    rhs = 2.0 * p1(2.0 * r)
    assert np.linalg.norm(lhs - rhs) / np.linalg.norm(lhs) < 1e-6


def test_shooting_rejects_bad_inputs():
    with pytest.raises(ValueError):
        shoot_scalar_profile(-1.0, 3.0, 20.0)
    with pytest.raises(ValueError):
        shoot_scalar_profile(1.0, 6.5, 20.0)


# ------------------------------ single solves ------------------------------

def test_mountain_pass_converges(grid800, params_p3, opts):
    from kgm.phi_reduction import electrostatic_identity_gap

    rep = mountain_pass_solve(params_p3, grid800, opts, EnergyMode.standard(1.0))
    assert rep.converged
    res = rep.residuals
    assert res.gradient_norm <= 1e-6
    assert res.nehari <= 1e-4
    assert res.pohozaev <= 1e-2
    assert rep.u.values[0] > 0.0
    assert rep.phi.values.min() >= -1e-10
    assert rep.phi.values.max() <= params_p3.omega / params_p3.e + 1e-10
    assert electrostatic_identity_gap(rep.u, rep.phi, params_p3) <= 1e-6


def test_nehari_descent_converges(grid800, params_p3, opts):
    rep = nehari_descent(params_p3, grid800, opts, EnergyMode.standard(1.0))
    assert rep.converged
    assert rep.residuals.gradient_norm <= 1e-6
    assert rep.residuals.nehari <= 1e-6


def test_methods_agree(grid800, params_p3, opts):
    mode = EnergyMode.standard(1.0)
    mp = mountain_pass_solve(params_p3, grid800, opts, mode)
    ne = nehari_descent(params_p3, grid800, opts, mode)
    rel = abs(mp.level_estimate - ne.level_estimate) / abs(ne.level_estimate)
    assert rel < 1e-3


def test_projection_idempotence(grid800, params_p3, rng):
    ws = _Workspace(params_p3, grid800, EnergyMode.standard(1.0))
    u = random_bump(grid800, rng)
    t1 = _project_to_nehari(ws, u.values)
    t2 = _project_to_nehari(ws, t1 * u.values)
    assert abs(t2 - 1.0) < 1e-8


def test_tiny_seed_projects_far(grid800, params_p3):
    # a nearly-zero seed either fails to project or lands far up the ray
    ws = _Workspace(params_p3, grid800, EnergyMode.standard(1.0))
    tiny = 1e-6 * np.exp(-grid800.nodes**2)
    tiny[-1] = 0.0
    try:
        t_star = _project_to_nehari(ws, tiny)
        assert t_star > 1e3
    except ProjectionFailed:
        pass


def test_zero_seed_collapses(grid800, params_p3, opts):
    zero_seed = SeedProfile(custom=Field(grid800, np.zeros(grid800.n)))
    bad = SolverOptions(grad_tol=1e-6, max_iters=100, seed_profile=zero_seed, method="nehari_descent")
    with pytest.raises(CollapseToZero):
        nehari_descent(params_p3, grid800, bad, EnergyMode.standard(1.0))


def test_decoupled_matches_shooting(grid800, opts):
    params = ModelParams(m=1.0, omega=0.5, e=0.0, nonlinearity=Power(3.0))
    rep = nehari_descent(params, grid800, opts, EnergyMode.standard(1.0))
    assert np.abs(rep.phi.values).max() == 0.0
    oracle = shoot_scalar_field(0.75, 3.0, grid800)
    w = grid800.weights
    diff = rep.u.values - oracle.values
    rel = math.sqrt(float(w @ (diff * diff)) / float(w @ (oracle.values**2)))
    assert rel < 1e-3


def test_zero_mass_single_solve(grid800, opts):
    params = ModelParams(m=1.0, omega=1.0, e=1.0, nonlinearity=DoublePower(5.0, 7.0, 5.0))
    rep = nehari_descent(params, grid800, opts, EnergyMode.zero_mass(1.0))
    assert rep.converged
    assert rep.residuals.nehari <= 1e-6


def test_report_serialization_fields(grid800, params_p3, opts):
    rep = nehari_descent(params_p3, grid800, opts, EnergyMode.standard(1.0))
    assert rep.norms_u.d12 > 0
    assert rep.norms_phi.d12 > 0
    assert rep.level_estimate == pytest.approx(rep.energy.total)
    assert rep.iterations > 0


# ------------------------------ continuations ------------------------------

def test_lambda_continuation_small(grid800, opts):
    params = ModelParams(m=1.0, omega=0.8, e=1.0, nonlinearity=Power(2.5))
    trace = lambda_continuation(params, grid800, opts)
    lams = trace.parameters
    assert lams[0] == pytest.approx(0.5)
    assert lams[-1] == pytest.approx(1.0)
    assert all(b > a for a, b in zip(lams, lams[1:]))
    levels = [s.report.level_estimate for s in trace.steps]
    assert all(b <= a + 1e-9 for a, b in zip(levels, levels[1:]))
    d12 = [s.report.norms_u.d12 for s in trace.steps]
    assert max(d12) < 10.0 * d12[0]
    assert all(s.certificate is not None for s in trace.steps)
    assert all(s.report.converged for s in trace.steps)


def test_lambda_continuation_requires_certified_region(grid800, opts):
    params = ModelParams(m=1.0, omega=0.95, e=1.0, nonlinearity=Power(2.5))
    with pytest.raises(ValueError):
        lambda_continuation(params, grid800, opts)


def test_lambda_continuation_nehari_method_agrees(grid800, opts):
    params = ModelParams(m=1.0, omega=0.8, e=1.0, nonlinearity=Power(2.5))
    mp_trace = lambda_continuation(params, grid800, opts)
    ne_opts = SolverOptions(grad_tol=1e-6, max_iters=30000, method="nehari_descent")
    ne_trace = lambda_continuation(params, grid800, ne_opts)
    a = mp_trace.final.level_estimate
    b = ne_trace.final.level_estimate
    assert abs(a - b) / abs(b) < 1e-3


def test_epsilon_continuation_small(opts):
    grid = make_grid(600, 30.0)
    params = ModelParams(m=1.0, omega=1.0, e=1.0, nonlinearity=DoublePower(5.0, 7.0, 5.0))
    local = SolverOptions(grad_tol=1e-6, max_iters=30000, method="nehari_descent")
    trace = epsilon_continuation(params, grid, local, eps_schedule=[1.0, 0.5, 0.25, 0.125])
    eps = trace.parameters
    assert eps[0] == 1.0 and eps[-1] == 0.0
    assert all(b < a for a, b in zip(eps, eps[1:]))
    assert all(s.fprime_mass > 1e-6 for s in trace.steps)
    final = trace.final
    assert final.converged
    assert final.residuals.gradient_norm <= 1e-5
    assert final.norms_phi.d12**2 > 0.0


def test_epsilon_continuation_requires_zero_mass(grid800, opts):
    params = ModelParams(m=1.0, omega=0.9, e=1.0, nonlinearity=DoublePower(5.0, 7.0, 5.0))
    with pytest.raises(ValueError):
        epsilon_continuation(params, grid800, opts)


def test_trace_monotonicity_validation(grid800, params_p3, opts):
    rep = nehari_descent(params_p3, grid800, opts, EnergyMode.standard(1.0))
    step = ContinuationStep(parameter=0.5, report=rep, fprime_mass=1.0)
    step2 = ContinuationStep(parameter=0.5, report=rep, fprime_mass=1.0)
    with pytest.raises(ValueError):
        ContinuationTrace(steps=[step, step2])

"""Acceptance gate: every criterion at its stated tolerance, one line each.

Run with `pytest tests/test_acceptance.py -v` (add -s to watch the verdict
lines stream).  Criteria are independent; each prints
`ACCEPTANCE <k> <name>: PASS|FAIL (<elapsed>s)` and enforces its runtime
budget.
"""

import math
import time
from contextlib import contextmanager

import numpy as np
import pytest

from kgm.cli import main as cli_main
from kgm.energy import EnergyMode, reduced_energy, reduced_gradient
from kgm.model import DoublePower, Field, ModelParams, Power, make_grid
from kgm.phi_reduction import refinement_ratio, solve_phi
from kgm.thresholds import (
    Region,
    admissible_alpha_interval,
    classify_existence,
    critical_ratio_sq,
    min_critical_ratio_sq,
    threshold_curve,
    threshold_curve_legacy,
)
from kgm.variational_solver import (
    SolverOptions,
    epsilon_continuation,
    lambda_continuation,
    mountain_pass_solve,
    nehari_descent,
    shoot_scalar_field,
    shoot_scalar_profile,
)


@contextmanager
def verdict(number: int, name: str, budget_s: float):
    start = time.time()
    try:
        yield
    except Exception:
        print(f"ACCEPTANCE {number} {name}: FAIL ({time.time() - start:.1f}s)", flush=True)
        raise
    elapsed = time.time() - start
    print(f"ACCEPTANCE {number} {name}: PASS ({elapsed:.1f}s)", flush=True)
    assert elapsed < budget_s, f"runtime {elapsed:.1f}s exceeded the {budget_s}s budget"


def test_criterion_1_coefficient_algebra():
    with verdict(1, "coefficient-algebra", 5.0):
        rng = np.random.default_rng(42)
        # A + B = C at 10^4 random points
        from kgm.thresholds import coefficients

        worst = 0.0
        for _ in range(10000):
            p = rng.uniform(2.01, 5.99)
            alpha = rng.uniform(-2.0, 1.0 / 6.0)
            t = coefficients(p, alpha)
            worst = max(worst, abs(t.a + t.b - t.c))
        assert worst < 1e-14

        # closed-form infimum vs brute-force grid minimization
        for p in (2.1, 2.2, 2.3, 2.4, 2.5, 2.6, 2.7, 2.8, 2.9, 3.0):
            lo, hi = admissible_alpha_interval(p)
            alphas = np.linspace(lo, hi, 10**6, endpoint=False)
            a = (1 + 2 * alphas * (p - 3)) / p
            c = (p - 2) * (1 - 6 * alphas) / (2 * p)
            brute = float(((a + c) ** 2 / (4 * a * c)).min())
            assert abs(brute - min_critical_ratio_sq(p)) < 1e-5

        assert abs(critical_ratio_sq(3.0, -1.0 / 6.0) - 1.0) < 1e-12

        # monotonicity of the two certificate factors on dense grids
        for p in (2.2, 2.5, 2.8):
            lo, hi = admissible_alpha_interval(p)
            alphas = np.linspace(lo + 1e-9, hi - 1e-6, 4000)
            h1 = (1 - 2 * alphas) ** 2 / (1 - 6 * alphas)
            h2 = 1.0 / (1 + 2 * alphas * (p - 3.0))
            assert np.all(np.diff(h1) > 0) and np.all(np.diff(h2) > 0)
            assert np.all(h1 > 0) and np.all(h2 > 0)


def test_criterion_2_g_curve():
    with verdict(2, "g-curve", 1.0):
        assert threshold_curve(3.0) == 1.0
        for p in np.linspace(2.001, 3.999, 1000):
            p = float(p)
            assert threshold_curve(p) >= threshold_curve_legacy(p) - 1e-15
        for p in np.linspace(2.001, 3.0, 700):
            p = float(p)
            assert abs(threshold_curve(p) ** 2 * min_critical_ratio_sq(p) - 1.0) < 1e-12


def test_criterion_3_phi_reduction():
    with verdict(3, "phi-reduction", 30.0):
        rng = np.random.default_rng(42)
        grid = make_grid(4000, 30.0)
        params = ModelParams(m=1.0, omega=0.5, e=1.0, nonlinearity=Power(3.0))
        ceiling = params.omega / params.e
        for _ in range(50):
            vals = np.zeros(grid.n)
            for _ in range(3):
                amp = rng.uniform(0.3, 3.0)
                center = rng.uniform(0.0, grid.r_max / 4)
                width = rng.uniform(0.5, 3.0)
                vals += amp * np.exp(-((grid.nodes - center) ** 2) / (2 * width * width))
            vals[-1] = 0.0
            sol = solve_phi(Field(grid, vals), params)
            phi = sol.phi.values
            assert phi.min() >= -1e-10
            assert phi.max() <= ceiling + 1e-10
            assert sol.identity_gap < 1e-6
        ratio = refinement_ratio(
            lambda r: 2.0 * np.exp(-(r**2) / 4.0), params, 1000, 30.0
        )
        assert 3.5 <= ratio <= 4.5


def test_criterion_4_gradient_oracle():
    with verdict(4, "gradient-oracle", 60.0):
        rng = np.random.default_rng(42)
        grid = make_grid(2000, 30.0)

        def bump():
            vals = np.zeros(grid.n)
            for _ in range(3):
                amp = rng.uniform(-2.0, 2.0)
                center = rng.uniform(0.0, 8.0)
                width = rng.uniform(0.5, 2.5)
                vals += amp * np.exp(-((grid.nodes - center) ** 2) / (2 * width * width))
            vals[-1] = 0.0
            return vals

        params_p = ModelParams(m=1.0, omega=0.5, e=1.0, nonlinearity=Power(3.0))
        params_z = ModelParams(m=1.0, omega=1.0, e=1.0, nonlinearity=DoublePower(5.0, 7.0, 5.0))
        cases = [
            (params_p, EnergyMode.standard(1.0)),
            (params_p, EnergyMode.standard(0.7)),
            (params_z, EnergyMode.zero_mass(0.3)),
        ]
        h = 1e-5
        for params, mode in cases:
            for _ in range(20):
                u, v = bump(), bump()
                g = reduced_gradient(Field(grid, u), params, mode)
                pair = float(grid.weights @ (g.values * v))
                ep = reduced_energy(Field(grid, u + h * v), params, mode).total
                em = reduced_energy(Field(grid, u - h * v), params, mode).total
                fd = (ep - em) / (2 * h)
                assert abs(fd - pair) <= 1e-5 * max(1.0, abs(pair))


def test_criterion_5_existence_solves():
    with verdict(5, "existence-solves", 600.0):
        grid4 = make_grid(4000, 50.0)
        grid8 = make_grid(8000, 50.0)
        mode = EnergyMode.standard(1.0)
        opts = SolverOptions(grad_tol=1e-6, max_iters=60000)
        refine_opts = SolverOptions(grad_tol=1e-7, max_iters=60000, method="nehari_descent")
        for p, ratio in ((3.0, 0.5), (2.5, 0.8), (4.5, 0.9)):
            params = ModelParams(m=1.0, omega=ratio, e=1.0, nonlinearity=Power(p))
            report = mountain_pass_solve(params, grid4, opts, mode)
            res = report.residuals
            assert report.converged, f"p={p} did not converge"
            assert res.gradient_norm <= 1e-6
            assert res.nehari <= 1e-4
            assert res.pohozaev <= 1e-2

            # the dilation residual is discretization-limited: halve the mesh
            fine4 = nehari_descent(params, grid4, refine_opts, mode)
            warm = np.interp(grid8.nodes, grid4.nodes, fine4.u.values)
            fine8 = nehari_descent(params, grid8, refine_opts, mode, initial_u=warm)
            assert fine8.converged
            assert fine8.residuals.pohozaev <= 0.55 * fine4.residuals.pohozaev


def test_criterion_6_decoupled_oracle():
    with verdict(6, "decoupled-oracle", 120.0):
        grid = make_grid(4000, 30.0)
        params = ModelParams(m=1.0, omega=0.5, e=0.0, nonlinearity=Power(3.0))
        opts = SolverOptions(grad_tol=1e-6, max_iters=60000)
        report = mountain_pass_solve(params, grid, opts, EnergyMode.standard(1.0))
        assert report.converged
        assert np.abs(report.phi.values).max() == 0.0
        oracle = shoot_scalar_field(0.75, 3.0, grid)
        w = grid.weights
        diff = report.u.values - oracle.values
        rel = math.sqrt(float(w @ (diff * diff)) / float(w @ (oracle.values**2)))
        assert rel <= 1e-3

        profile_1 = shoot_scalar_profile(1.0, 4.0, 22.0)
        profile_4 = shoot_scalar_profile(4.0, 4.0, 11.0)
        r = np.linspace(0.05, 10.5, 600)
        lhs = profile_4(r)
        rhs = 2.0 * profile_1(2.0 * r)
        assert np.linalg.norm(lhs - rhs) / np.linalg.norm(lhs) <= 1e-6


def test_criterion_7_lambda_continuation():
    with verdict(7, "lambda-continuation", 600.0):
        grid = make_grid(4000, 50.0)
        params = ModelParams(m=1.0, omega=0.8, e=1.0, nonlinearity=Power(2.5))
        opts = SolverOptions(grad_tol=1e-6, max_iters=60000)
        trace = lambda_continuation(params, grid, opts)
        lams = trace.parameters
        assert len(lams) == 6
        assert lams[0] == pytest.approx(0.5) and lams[-1] == pytest.approx(1.0)
        assert all(s.report.converged for s in trace.steps)
        levels = [s.report.level_estimate for s in trace.steps]
        assert all(b <= a * (1 + 1e-12) + 1e-12 for a, b in zip(levels, levels[1:]))
        d12 = [s.report.norms_u.d12 for s in trace.steps]
        assert max(d12) < 10.0 * d12[0]


def test_criterion_8_zero_mass_continuation():
    with verdict(8, "zero-mass-continuation", 1200.0):
        grid = make_grid(2000, 40.0)
        params = ModelParams(m=1.0, omega=1.0, e=1.0, nonlinearity=DoublePower(5.0, 7.0, 5.0))
        opts = SolverOptions(grad_tol=1e-6, max_iters=60000, method="nehari_descent")
        schedule = [2.0**-k for k in range(13)]  # 1 * 2^-k, k = 0..12
        trace = epsilon_continuation(params, grid, opts, eps_schedule=schedule)
        assert len(trace.steps) == 14  # 13 positive eps plus the eps=0 polish
        assert all(s.report.converged for s in trace.steps)

        d12_u = [s.report.norms_u.d12 for s in trace.steps[-6:]]
        d12_phi = [s.report.norms_phi.d12 for s in trace.steps[-6:]]
        assert max(d12_u) / min(d12_u) < 2.0
        assert max(d12_phi) / min(d12_phi) < 2.0

        assert min(s.fprime_mass for s in trace.steps) >= 1e-6

        final = trace.final
        assert final.residuals.gradient_norm <= 10.0 * opts.grad_tol
        assert final.norms_phi.d12**2 > 0.0


def test_criterion_9_classifier_and_determinism(tmp_path):
    with verdict(9, "classifier-determinism", 30.0):
        cases = [
            ((2.5, 0.8), Region.EXISTENCE_THM1),
            ((6.0, 0.9), Region.NONEXISTENCE),
            ((2.5, 0.95), Region.UNKNOWN),
            ((4.0, 0.9), Region.EXISTENCE_DM),
            ((4.5, 0.9), Region.EXISTENCE_BF),
            ((1.5, 0.5), Region.NONEXISTENCE),
        ]
        for (p, ratio), expected in cases:
            assert classify_existence(p, ratio) is expected

        out1, out2 = tmp_path / "a", tmp_path / "b"
        for out in (out1, out2):
            code = cli_main(["sweep", "--out", str(out), "--no-plots"])
            assert code == 0
        for name in ("regions.csv", "curves.csv", "g_curve.dat"):
            assert (out1 / name).read_bytes() == (out2 / name).read_bytes()

"""Runtime invariant suite behind the selftest command.

Each check exercises one documented invariant of a module at a reduced
problem size and returns (ok, one-line detail).  The full list runs in a
couple of minutes; --quick trims it to the pure-arithmetic checks so it
finishes in seconds.  The --sabotage hook deliberately corrupts one
computation so the harness can prove the corresponding check really fires.
"""

from __future__ import annotations

import math
from typing import Callable, Iterator, Tuple

import numpy as np

from . import thresholds as th
from .energy import (
    EnergyMode,
    reduced_energy,
    reduced_gradient,
    two_field_action,
)
from .model import (
    DoublePower,
    Field,
    ModelParams,
    Power,
    eval_f,
    field_from_function,
    field_norms,
    integrate,
    make_grid,
)
from .phi_reduction import solve_phi
from .variational_solver import (
    SolverOptions,
    _project_to_nehari,
    _Workspace,
    epsilon_continuation,
    mountain_pass_solve,
    nehari_descent,
    shoot_scalar_field,
    shoot_scalar_profile,
)

Check = Tuple[str, Callable[[], Tuple[bool, str]]]


def _params(p=3.0, m=1.0, omega=0.5, e=1.0) -> ModelParams:
    return ModelParams(m=m, omega=omega, e=e, nonlinearity=Power(p))


def _bump(grid, rng, n_bumps=3):
    v = np.zeros(grid.n)
    for _ in range(n_bumps):
        a = rng.uniform(0.3, 2.0)
        c = rng.uniform(0.0, grid.r_max / 4.0)
        s = rng.uniform(0.5, 2.5)
        v += a * np.exp(-((grid.nodes - c) ** 2) / (2 * s * s))
    v[-1] = 0.0
    return Field(grid, v)


def build_checks(quick: bool, sabotage: str, seed: int) -> Iterator[Check]:
    rng = np.random.default_rng(seed)

    # ---------------- model ----------------
    def quadrature_exactness():
        worst = 0.0
        for n, r_max in ((16, 3.0), (200, 12.0), (1500, 40.0)):
            g = make_grid(n, r_max)
            exact = 4.0 * math.pi * r_max**3 / 3.0
            worst = max(worst, abs(g.weights.sum() - exact) / exact)
        ok = worst < 1e-10
        return ok, f"volume weight-sum relative error {worst:.2e}"

    yield "quadrature volume exactness", quadrature_exactness

    def quadrature_refinement():
        errs = []
        for n in (500, 1000, 2000):
            g = make_grid(n, 10.0)
            val = integrate(field_from_function(g, lambda r: np.exp(-(r**2))))
            errs.append(abs(val - math.pi**1.5))
        r1, r2 = errs[0] / errs[1], errs[1] / errs[2]
        ok = r1 >= 3.5 and r2 >= 3.5
        return ok, f"halving reduces Gaussian error by {r1:.2f}x, {r2:.2f}x"

    yield "quadrature refinement order", quadrature_refinement

    def norm_homogeneity():
        g = make_grid(300, 15.0)
        u = _bump(g, rng)
        c = 3.7
        cu = Field(g, c * u.values)
        n1 = field_norms(u, 3.0)
        n2 = field_norms(cu, 3.0)
        worst = max(
            abs(n2.d12 - c * n1.d12) / max(1e-300, c * n1.d12),
            abs(n2.l2 - c * n1.l2) / (c * n1.l2),
            abs(n2.lp - c * n1.lp) / (c * n1.lp),
            abs(n2.h1 - c * n1.h1) / (c * n1.h1),
        )
        return worst < 1e-12, f"worst scaling defect {worst:.2e}"

    yield "norm homogeneity", norm_homogeneity

    def nonlinearity_derivative():
        worst = 0.0
        h = 1e-6
        for nl in (Power(3.0), Power(4.5), DoublePower(5.0, 7.0, 5.0)):
            ts = rng.uniform(-10.0, 10.0, size=100)
            ts = ts[np.abs(ts) > 1e-3]
            _, fp = eval_f(nl, ts)
            fp_num = (eval_f(nl, ts + h)[0] - eval_f(nl, ts - h)[0]) / (2 * h)
            worst = max(worst, float(np.max(np.abs(fp_num - fp) / np.maximum(1e-8, np.abs(fp)))))
        return worst < 1e-6, f"worst relative derivative defect {worst:.2e}"

    yield "nonlinearity derivative consistency", nonlinearity_derivative

    # ---------------- thresholds ----------------
    def abc_identity():
        worst = 0.0
        n_draw = 2000 if quick else 10000
        for _ in range(n_draw):
            p = rng.uniform(2.01, 5.99)
            al = rng.uniform(-2.0, 1.0 / 6.0)
            t = th.coefficients(p, al, _sabotage=(sabotage == "ab-identity"))
            worst = max(worst, abs(t.a + t.b - t.c))
        return worst < 1e-14, f"max |A+B-C| = {worst:.2e} over {n_draw} draws"

    yield "coefficient identity A+B=C", abc_identity

    def ac_positivity():
        ok = True
        for _ in range(500):
            p = rng.uniform(2.05, 3.95)
            lo, hi = th.admissible_alpha_interval(p)
            al = rng.uniform(lo + 1e-9, hi - 1e-9)
            t = th.coefficients(p, al)
            ok = ok and t.a > 0.0 and t.c > 0.0
        return ok, "A > 0 and C > 0 on the admissible interval"

    yield "coefficient positivity", ac_positivity

    def g_dominates():
        ps = np.linspace(2.001, 3.999, 1000)
        ok = all(th.threshold_curve(p) >= th.threshold_curve_legacy(p) - 1e-15 for p in ps)
        strict = all(
            th.threshold_curve(p) > th.threshold_curve_legacy(p) for p in ps if p < 3.0
        )
        return ok and strict, "g(p) >= g0(p), strictly below p=3"

    yield "threshold dominance", g_dominates

    def k3_increasing():
        lo, hi = th.admissible_alpha_interval(3.0)
        alphas = np.linspace(lo + 1e-9, hi - 1e-6, 2000)
        ks = [th.critical_ratio_sq(3.0, a) for a in alphas]
        ok = all(k2 > k1 for k1, k2 in zip(ks, ks[1:]))
        return ok, "K(3, .) increasing on the admissible interval"

    yield "K increasing at p=3", k3_increasing

    def h_factors_monotone():
        ok = True
        for p in (2.2, 2.5, 2.8):
            lo, hi = th.admissible_alpha_interval(p)
            alphas = np.linspace(lo + 1e-9, hi - 1e-6, 1500)
            h1 = (1 - 2 * alphas) ** 2 / (1 - 6 * alphas)
            h2 = 1.0 / (1 + 2 * alphas * (p - 3.0))
            ok = ok and np.all(h1 > 0) and np.all(h2 > 0)
            ok = ok and np.all(np.diff(h1) > 0) and np.all(np.diff(h2) > 0)
        return bool(ok), "certificate factors positive and increasing"

    yield "certificate factor monotonicity", h_factors_monotone

    def inf_kp_closed_form():
        worst = 0.0
        for p in (2.2, 2.5, 2.8, 3.0):
            lo, hi = th.admissible_alpha_interval(p)
            alphas = np.linspace(lo, hi, 100001, endpoint=False)
            a = (1 + 2 * alphas * (p - 3)) / p
            c = (p - 2) * (1 - 6 * alphas) / (2 * p)
            brute = float(((a + c) ** 2 / (4 * a * c)).min())
            worst = max(worst, abs(brute - th.min_critical_ratio_sq(p)))
        return worst < 1e-5, f"brute-force infimum gap {worst:.2e}"

    yield "K infimum closed form", inf_kp_closed_form

    def reciprocal_identity():
        worst = max(
            abs(th.threshold_curve(p) ** 2 * th.min_critical_ratio_sq(p) - 1.0)
            for p in np.linspace(2.001, 3.0, 500)
        )
        return worst < 1e-12, f"max |g^2 inf K - 1| = {worst:.2e}"

    yield "threshold reciprocal identity", reciprocal_identity

    def certificate_equivalence():
        ok = True
        for _ in range(60):
            p = rng.uniform(2.05, 3.0)
            lo, hi = th.admissible_alpha_interval(p)
            al = rng.uniform(lo + 1e-6, hi - 1e-6)
            ratio = rng.uniform(0.1, 0.999)
            kp = th.critical_ratio_sq(p, al)
            passes = th.check_quadratic_nonneg(p, al, 1.0, ratio).passed
            should = kp <= 1.0 / ratio**2 + 1e-12
            margin = abs(kp - 1.0 / ratio**2)
            if margin > 1e-9 and passes != should:
                ok = False
        return ok, "quadratic certificate iff K <= (m/omega)^2"

    yield "certificate equivalence", certificate_equivalence

    if quick:
        return

    # ---------------- phi reduction ----------------
    g300 = make_grid(400, 20.0)
    params = _params()

    def phi_determinism():
        u = _bump(g300, np.random.default_rng(seed + 1))
        a = solve_phi(u, params).phi.values
        b = solve_phi(u, params).phi.values
        return bool(np.array_equal(a, b)), "repeated solves agree bitwise"

    yield "potential solve determinism", phi_determinism

    def phi_amplitude_monotonicity():
        rloc = np.random.default_rng(seed + 2)
        ok = True
        for _ in range(5):
            u1 = _bump(g300, rloc)
            u2 = Field(g300, 2.0 * u1.values)
            q1 = integrate(Field(g300, solve_phi(u1, params).phi.values * u1.values**2))
            q2 = integrate(Field(g300, solve_phi(u2, params).phi.values * u2.values**2))
            ok = ok and q2 >= q1 - 1e-12
        return ok, "interaction charge grows with amplitude"

    yield "potential amplitude monotonicity", phi_amplitude_monotonicity

    def phi_sign_and_zero():
        z = Field(g300, np.zeros(g300.n))
        pz = solve_phi(z, params).phi
        u = _bump(g300, np.random.default_rng(seed + 3))
        pu = solve_phi(u, params).phi
        ok = np.abs(pz.values).max() == 0.0 and pu.values.min() >= -1e-12 and pu.values.max() > 0
        return bool(ok), "phi >= 0, and phi == 0 iff u == 0"

    yield "potential sign", phi_sign_and_zero

    def phi_bound_saturation():
        base = _bump(g300, np.random.default_rng(seed + 4))
        ceil = params.omega / params.e
        gaps = []
        for amp in (10.0, 100.0, 1000.0):
            u = Field(g300, amp * base.values)
            gaps.append(ceil - solve_phi(u, params).phi.values.max())
        # gap to the ceiling shrinks monotonically (to rounding) and stays >= 0
        ok = all(g >= -1e-10 for g in gaps) and all(
            b <= a + 1e-12 for a, b in zip(gaps, gaps[1:])
        )
        return bool(ok), f"ceiling gaps {gaps[0]:.2e} -> {gaps[1]:.2e} -> {gaps[2]:.2e}"

    yield "potential bound saturation", phi_bound_saturation

    # ---------------- energy ----------------
    def gradient_oracle():
        rloc = np.random.default_rng(seed + 5)
        worst = 0.0
        cases = [
            (_params(3.0), EnergyMode.standard(1.0)),
            (_params(3.0), EnergyMode.standard(0.7)),
            (
                ModelParams(m=1.0, omega=1.0, e=1.0, nonlinearity=DoublePower(5.0, 7.0, 5.0)),
                EnergyMode.zero_mass(0.25),
            ),
        ]
        h = 1e-5
        for prm, mode in cases:
            for _ in range(4):
                u = _bump(g300, rloc)
                v = _bump(g300, rloc)
                gr = reduced_gradient(u, prm, mode)
                pair = float(g300.weights @ (gr.values * v.values))
                ep = reduced_energy(Field(g300, u.values + h * v.values), prm, mode).total
                em = reduced_energy(Field(g300, u.values - h * v.values), prm, mode).total
                fd = (ep - em) / (2 * h)
                worst = max(worst, abs(fd - pair) / max(1.0, abs(pair)))
        return worst < 1e-5, f"worst finite-difference defect {worst:.2e}"

    yield "energy gradient oracle", gradient_oracle

    def reduction_identity():
        u = _bump(g300, np.random.default_rng(seed + 6))
        mode = EnergyMode.standard(1.0)
        phi = solve_phi(u, params).phi
        s_val = two_field_action(u, phi, params, mode)
        i_val = reduced_energy(u, params, mode, phi=phi).total
        gap = abs(s_val - i_val) / max(1.0, abs(i_val))
        return gap < 1e-8, f"two-field vs reduced energy gap {gap:.2e}"

    yield "reduction identity", reduction_identity

    def lambda_monotonicity():
        u = _bump(g300, np.random.default_rng(seed + 7))
        lams = np.linspace(0.5, 1.0, 6)
        path = [Field(g300, t * 3.0 * u.values) for t in np.linspace(0.0, 1.0, 9)]
        maxima = []
        for lam in lams:
            mode = EnergyMode.standard(float(lam))
            maxima.append(max(reduced_energy(q, params, mode).total for q in path))
        ok = all(b <= a + 1e-12 for a, b in zip(maxima, maxima[1:]))
        return ok, "path maximum nonincreasing in the homotopy weight"

    yield "level monotonicity", lambda_monotonicity

    def small_sphere_positivity():
        rloc = np.random.default_rng(seed + 8)
        mode = EnergyMode.standard(1.0)
        ok = True
        for _ in range(15):
            u = _bump(g300, rloc)
            nn = field_norms(u, 3.0)
            u_small = Field(g300, (1e-2 / nn.h1) * u.values)
            ok = ok and reduced_energy(u_small, params, mode).total > 0.0
        return ok, "energy positive on a small sphere"

    yield "mountain-pass positivity", small_sphere_positivity

    # ---------------- solver ----------------
    def projection_idempotence():
        ws = _Workspace(params, g300, EnergyMode.standard(1.0))
        u = _bump(g300, np.random.default_rng(seed + 9))
        t1 = _project_to_nehari(ws, u.values)
        t2 = _project_to_nehari(ws, t1 * u.values)
        return abs(t2 - 1.0) < 1e-8, f"|t*(t* u) - 1| = {abs(t2 - 1.0):.2e}"

    yield "fibering projection idempotence", projection_idempotence

    def solver_report_invariants():
        opts = SolverOptions(grad_tol=1e-6, max_iters=20000, method="nehari_descent")
        rep = nehari_descent(params, g300, opts, EnergyMode.standard(1.0))
        res = rep.residuals
        ok = (
            rep.converged
            and res.gradient_norm <= 1e-6
            and res.nehari <= 1e-4
            and res.pohozaev <= 1e-2
        )
        return ok, (
            f"grad {res.gradient_norm:.1e}, nehari {res.nehari:.1e}, "
            f"pohozaev {res.pohozaev:.1e}"
        )

    yield "converged report invariants", solver_report_invariants

    def method_independence():
        opts = SolverOptions(grad_tol=1e-6, max_iters=20000)
        mode = EnergyMode.standard(1.0)
        mp = mountain_pass_solve(params, g300, opts, mode)
        ne = nehari_descent(params, g300, opts, mode)
        rel = abs(mp.level_estimate - ne.level_estimate) / abs(ne.level_estimate)
        return mp.converged and ne.converged and rel < 1e-3, f"level gap {rel:.2e}"

    yield "method independence", method_independence

    def decoupled_oracle():
        g_fine = make_grid(1000, 25.0)
        p0 = ModelParams(m=1.0, omega=0.5, e=0.0, nonlinearity=Power(3.0))
        opts = SolverOptions(grad_tol=1e-6, max_iters=20000, method="nehari_descent")
        rep = nehari_descent(p0, g_fine, opts, EnergyMode.standard(1.0))
        oracle = shoot_scalar_field(0.75, 3.0, g_fine)
        w = g_fine.weights
        diff = rep.u.values - oracle.values
        rel = math.sqrt(float(w @ (diff * diff))) / math.sqrt(float(w @ (oracle.values**2)))
        phi_zero = np.abs(rep.phi.values).max() == 0.0
        return rel < 1e-3 and phi_zero, f"oracle L2 gap {rel:.2e}, phi == 0: {phi_zero}"

    yield "decoupled shooting oracle", decoupled_oracle

    def shooting_scaling():
        prof1 = shoot_scalar_profile(1.0, 4.0, 20.0)
        prof4 = shoot_scalar_profile(4.0, 4.0, 10.0)
        r = np.linspace(0.05, 9.5, 400)
        u4 = prof4(r)
        u1s = 2.0 * prof1(2.0 * r)
        rel = float(np.linalg.norm(u4 - u1s) / np.linalg.norm(u4))
        return rel < 1e-6, f"amplitude-scale law defect {rel:.2e}"

    yield "shooting scaling law", shooting_scaling

    def epsilon_trace_diagnostics():
        prm = ModelParams(m=1.0, omega=1.0, e=1.0, nonlinearity=DoublePower(5.0, 7.0, 5.0))
        g_small = make_grid(500, 25.0)
        opts = SolverOptions(grad_tol=1e-5, max_iters=20000, method="nehari_descent")
        trace = epsilon_continuation(prm, g_small, opts, eps_schedule=[1.0, 0.5, 0.25, 0.125])
        levels = [s.report.level_estimate for s in trace.steps]
        fmass = [s.fprime_mass for s in trace.steps]
        ok = max(levels) < 10.0 * max(1.0, levels[0]) and min(fmass) > 1e-6
        return ok, f"levels bounded by {max(levels):.3f}, min f'(u)u mass {min(fmass):.3f}"

    yield "regularization trace diagnostics", epsilon_trace_diagnostics

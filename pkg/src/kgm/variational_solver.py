"""Critical-point solvers for the reduced energy and the two continuations.

Two complementary methods find the nontrivial critical point:

* :func:`mountain_pass_solve` maintains a discrete path from 0 to a
  negative-energy endpoint, repeatedly locating the path maximum, refining
  it onto the local crest, taking a backtracking descent step in the H1
  (Sobolev) metric, and re-relaxing the rest of the path.  The converged
  path maximum is the candidate critical point and its energy estimates the
  minimax level.

* :func:`nehari_descent` constrains iterates to the set where
  <I'(u), u> = 0 by rescaling along the ray through u (the fibering map has
  a unique positive critical point for the nonlinearities used here) and
  descends the energy on that constraint.

Parameter continuations warm-start one solve from the previous one:
:func:`lambda_continuation` walks the homotopy weight up to 1 while
monitoring the gradient-norm certificate, and :func:`epsilon_continuation`
walks the zero-mass regularization down to 0, monitoring the uniform
gradient-seminorm bounds and the f'(u)u mass, and finishes with a polish of
the unregularized problem.

:func:`shoot_scalar_field` provides an independent oracle for the decoupled
e = 0 equation -u'' - (2/r) u' + Omega u = |u|^(p-2) u by classic
overshoot/undershoot bisection on u(0).
"""

from __future__ import annotations

import math
from collections import deque
from dataclasses import dataclass, field
from typing import Callable, List, Optional

import numpy as np
from scipy.integrate import solve_ivp
from scipy.linalg import cho_solve_banded, cholesky_banded
from scipy.optimize import brentq

from .errors import (
    BisectionStalled,
    BoundednessMonitorTripped,
    CollapseToZero,
    MassLeak,
    ProjectionFailed,
    UniformBoundViolated,
)
from .model import (
    DoublePower,
    Field,
    ModelParams,
    Power,
    RadialGrid,
    eval_f,
    field_norms,
    verify_f_hypotheses,
)
from .energy import (
    EnergyBreakdown,
    EnergyMode,
    IdentityResiduals,
    boundedness_certificate,
    gradient_norm,
    nehari_residual,
    pohozaev_residual,
    reduced_energy,
    reduced_gradient,
)
from .phi_reduction import solve_phi
from .thresholds import Region, classify_existence, find_alpha

__all__ = [
    "StepRule",
    "SeedProfile",
    "SolverOptions",
    "SolutionReport",
    "ContinuationStep",
    "ContinuationTrace",
    "solve",
    "mountain_pass_solve",
    "nehari_descent",
    "lambda_continuation",
    "epsilon_continuation",
    "shoot_scalar_field",
    "shoot_scalar_profile",
    "default_lambda_schedule",
    "default_epsilon_schedule",
]

_DELTA = 0.5  # lower end of the homotopy window [delta, 1]


# --------------------------------------------------------------------------
# Options and result types
# --------------------------------------------------------------------------

@dataclass(frozen=True)
class StepRule:
    """Backtracking line-search parameters for the Sobolev descent step."""

    c1: float = 1e-4
    shrink: float = 0.5
    grow: float = 1.3
    s_init: float = 1.0
    s_max: float = 64.0
    max_backtracks: int = 50


@dataclass(frozen=True)
class SeedProfile:
    """Initial Gaussian bump A*exp(-r^2/(2 width^2)), or a custom field."""

    amplitude: float = 2.0
    width: float = 2.0
    custom: Optional[Field] = None

    def build(self, grid: RadialGrid) -> np.ndarray:
        if self.custom is not None:
            if self.custom.grid is not grid and self.custom.grid.n != grid.n:
                raise ValueError("custom seed lives on a different grid")
            vals = self.custom.values.copy()
        else:
            vals = self.amplitude * np.exp(-(grid.nodes**2) / (2.0 * self.width**2))
        vals[-1] = 0.0  # outer Dirichlet condition
        return vals


@dataclass(frozen=True)
class SolverOptions:
    """Knobs of the critical-point solvers."""

    method: str = "mountain_pass"
    max_iters: int = 20000
    grad_tol: float = 1e-6
    step_rule: StepRule = field(default_factory=StepRule)
    path_points: int = 16
    seed_profile: SeedProfile = field(default_factory=SeedProfile)
    collapse_tol: float = 1e-8
    relax_every: int = 10
    redistribute_every: int = 50

    def __post_init__(self):
        if self.method not in ("mountain_pass", "nehari_descent"):
            raise ValueError(f"unknown method {self.method!r}")
        if not self.grad_tol > 0.0:
            raise ValueError("grad_tol must be positive")
        if self.path_points < 8:
            raise ValueError("path_points must be at least 8")


@dataclass(frozen=True)
class SolutionReport:
    """Converged (or best-effort) critical point with its diagnostics."""

    u: Field
    phi: Field
    energy: EnergyBreakdown
    residuals: IdentityResiduals
    norms_u: FieldNorms
    norms_phi: FieldNorms
    iterations: int
    level_estimate: float
    converged: bool


@dataclass(frozen=True)
class ContinuationStep:
    """One continuation step: parameter value, report, and monitors."""

    parameter: float
    report: SolutionReport
    fprime_mass: float
    certificate: Optional[float] = None


@dataclass(frozen=True)
class ContinuationTrace:
    """Ordered continuation steps with strictly monotone parameter."""

    steps: List[ContinuationStep]

    def __post_init__(self):
        ps = [s.parameter for s in self.steps]
        diffs = np.diff(ps)
        if len(diffs) and not (np.all(diffs > 0) or np.all(diffs < 0)):
            raise ValueError(f"continuation parameters not strictly monotone: {ps}")

    @property
    def parameters(self) -> List[float]:
        return [s.parameter for s in self.steps]

    @property
    def final(self) -> SolutionReport:
        return self.steps[-1].report


# --------------------------------------------------------------------------
# Shared descent machinery
# --------------------------------------------------------------------------

class _Workspace:
    """Per-solve cache: grid operators and the H1 preconditioner factor."""

    def __init__(self, params: ModelParams, grid: RadialGrid, mode: EnergyMode):
        self.params = params
        self.grid = grid
        self.mode = mode
        n = grid.n
        h = grid.h
        coef = 4.0 * math.pi / (h * h)
        m = grid.seg_moments
        w = grid.weights
        diag = np.empty(n - 1)
        diag[0] = coef * m[0]
        diag[1:] = coef * (m[: n - 2] + m[1 : n - 1])
        diag = diag + w[: n - 1]  # H1 metric: stiffness + mass
        upper = -coef * m[: n - 2]
        ab = np.zeros((2, n - 1))
        ab[0, 1:] = upper
        ab[1, :] = diag
        self._chol = cholesky_banded(ab, lower=False)
        self.p_eff = params.nonlinearity.p

    def energy(self, vals: np.ndarray) -> float:
        u = Field(self.grid, vals)
        return reduced_energy(u, self.params, self.mode).total

    def gradient(self, vals: np.ndarray) -> np.ndarray:
        u = Field(self.grid, vals)
        return reduced_gradient(u, self.params, self.mode).values

    def sobolev_direction(self, g_vals: np.ndarray) -> np.ndarray:
        """Solve (K + W) d = W g on the interior, d_n = 0."""
        rhs = (self.grid.weights * g_vals)[: self.grid.n - 1]
        d = np.zeros(self.grid.n)
        d[: self.grid.n - 1] = cho_solve_banded((self._chol, False), rhs)
        return d

    def pair(self, g_vals: np.ndarray, v_vals: np.ndarray) -> float:
        return float(self.grid.weights @ (g_vals * v_vals))

    def m_inner(self, a: np.ndarray, b: np.ndarray) -> float:
        """H1 inner product a^T (K + W) b of the preconditioning metric."""
        from .model import stiffness_matvec

        return float(a @ stiffness_matvec(self.grid, b)) + self.pair(a, b)

    def bb_step(
        self,
        vals: np.ndarray,
        d: np.ndarray,
        prev_vals: Optional[np.ndarray],
        prev_d: Optional[np.ndarray],
    ) -> Optional[float]:
        """Barzilai-Borwein step length in the preconditioning metric.

        The preconditioned iteration is steepest descent in the H1 metric
        with gradient d, so the secant pair is (u_k - u_{k-1}, d_k - d_{k-1}).
        Returns None when the history is unusable (first step or negative
        curvature estimate)."""
        if prev_vals is None or prev_d is None:
            return None
        du = vals - prev_vals
        dd = d - prev_d
        denom = self.m_inner(dd, dd)
        numer = self.m_inner(du, dd)
        if not (numer > 0.0 and denom > 0.0):
            return None
        return numer / denom

    def grad_norm(self, g_vals: np.ndarray) -> float:
        """Residual norm over the unknowns (outer Dirichlet node excluded)."""
        w = self.grid.weights[:-1]
        v = g_vals[:-1]
        return math.sqrt(float(w @ (v * v)))

    def lp_norm(self, vals: np.ndarray) -> float:
        w = self.grid.weights
        return float(w @ np.abs(vals) ** self.p_eff) ** (1.0 / self.p_eff)


def _armijo_step(
    ws: _Workspace,
    vals: np.ndarray,
    e0: float,
    g_vals: np.ndarray,
    d_vals: np.ndarray,
    rule: StepRule,
    s_start: float,
    lenient_first: bool = False,
) -> tuple[np.ndarray, float, float, bool]:
    """Backtracking step along -d.  Returns (new vals, new energy, accepted s, ok).

    With ``lenient_first`` the first trial (a Barzilai-Borwein guess) is
    accepted on simple decrease; later trials require the Armijo condition.
    """
    slope = ws.pair(g_vals, d_vals)
    if slope <= 0.0:
        # preconditioner guarantees slope > 0 in exact arithmetic
        return vals, e0, s_start, False
    amp_cap = 1e6 * max(1.0, float(np.abs(vals).max()))
    s = min(max(s_start, 1e-12), rule.s_max)
    floor = 1e3 * np.finfo(float).eps * max(1.0, abs(e0))
    first = True
    for _ in range(rule.max_backtracks):
        trial = vals - s * d_vals
        if float(np.abs(trial).max()) > amp_cap:
            s *= rule.shrink
            first = False
            continue
        e1 = ws.energy(trial)
        good = e1 <= e0 - rule.c1 * s * slope or (rule.c1 * s * slope < floor and e1 <= e0)
        if good or (first and lenient_first and e1 <= e0):
            return trial, e1, s, True
        s *= rule.shrink
        first = False
    return vals, e0, s, False


def _endpoint_mode(params: ModelParams, mode: EnergyMode) -> EnergyMode:
    """Mode in which the path endpoint must have negative energy.

    In standard mode the endpoint is validated at the bottom of the homotopy
    window (energies decrease in lam, so negativity persists for lam >=
    delta); in zero-mass mode at the solve's own regularization (energies
    decrease as eps does).
    """
    if mode.kind == "standard":
        return EnergyMode.standard(_DELTA)
    return mode


def _negative_endpoint(ws: _Workspace, seed: np.ndarray, params, mode) -> np.ndarray:
    probe = _Workspace(params, ws.grid, _endpoint_mode(params, mode))
    tau = 1.0
    for _ in range(80):
        vals = tau * seed
        if probe.energy(vals) < -1e-8:
            return vals
        tau *= 2.0
    raise CollapseToZero("could not find a negative-energy path endpoint")


# --------------------------------------------------------------------------
# Mountain-pass path solver
# --------------------------------------------------------------------------

def _redistribute_to(path: List[np.ndarray], ws: _Workspace, n_pts: int) -> List[np.ndarray]:
    """Re-sample the polyline at uniform arclength with n_pts vertices."""
    n_in = len(path)
    seg = np.empty(n_in - 1)
    for j in range(n_in - 1):
        d = path[j + 1] - path[j]
        seg[j] = math.sqrt(ws.pair(d, d) + 1e-300)
    cum = np.concatenate([[0.0], np.cumsum(seg)])
    total = cum[-1]
    if total <= 0.0:
        return path
    targets = np.linspace(0.0, total, n_pts)
    out = [path[0]]
    for t in targets[1:-1]:
        j = int(np.searchsorted(cum, t, side="right") - 1)
        j = min(j, n_in - 2)
        frac = (t - cum[j]) / max(seg[j], 1e-300)
        out.append((1.0 - frac) * path[j] + frac * path[j + 1])
    out.append(path[-1])
    return out


def _mountain_pass_core(
    params: ModelParams,
    grid: RadialGrid,
    opts: SolverOptions,
    mode: EnergyMode,
    initial_path: Optional[List[np.ndarray]] = None,
) -> tuple[np.ndarray, int, bool, List[np.ndarray]]:
    """Run the path iteration; returns (best point, iterations, converged, path)."""
    ws = _Workspace(params, grid, mode)
    rule = opts.step_rule

    if initial_path is not None:
        path = [v.copy() for v in initial_path]
    else:
        seed = opts.seed_profile.build(grid)
        endpoint = _negative_endpoint(ws, seed, params, mode)
        ts = np.linspace(0.0, 1.0, opts.path_points)
        path = [t * endpoint for t in ts]
    energies = [ws.energy(v) for v in path]

    def seg_len(a: np.ndarray, b: np.ndarray) -> float:
        d = a - b
        return math.sqrt(ws.pair(d, d))

    s_prev = rule.s_init
    iterations = 0
    converged = False
    best = path[int(np.argmax(energies[1:-1])) + 1]
    prev_k = -1
    prev_vals: Optional[np.ndarray] = None
    prev_d: Optional[np.ndarray] = None

    crest_phase = False
    while iterations < opts.max_iters:
        iterations += 1
        k = int(np.argmax(energies[1:-1])) + 1

        if not crest_phase:
            # the crest may hide inside a segment: probe the midpoints next
            # to the vertex maximum and insert one as a new vertex if higher
            gap = 1e-10 * max(1.0, abs(energies[k]))
            for j in (k - 1, k):
                mid = 0.5 * (path[j] + path[j + 1])
                e_mid = ws.energy(mid)
                if e_mid > energies[k] + gap:
                    path.insert(j + 1, mid)
                    energies.insert(j + 1, e_mid)
                    k = j + 1
                    break
        else:
            # crest following: re-maximize along the ray through the vertex
            # (the local path parametrization near the top); the fibering
            # slope has a unique positive root for these nonlinearities
            try:
                t_star = _project_to_nehari(ws, path[k], t_guess=1.0)
                if 0.0 < t_star < 1e6:
                    path[k] = t_star * path[k]
                    energies[k] = ws.energy(path[k])
            except ProjectionFailed:
                pass

        best = path[k]
        if ws.lp_norm(path[k]) < opts.collapse_tol:
            raise CollapseToZero(
                f"path maximum collapsed: Lp norm below {opts.collapse_tol}"
            )
        g = ws.gradient(path[k])
        gn = ws.grad_norm(g)
        if gn <= opts.grad_tol:
            converged = True
            break
        # the path phase only needs to localize the pass basin; afterwards
        # the crest following is the sharper local parametrization
        crest_phase = (
            crest_phase
            or gn <= max(100.0 * opts.grad_tol, 1e-2)
            or iterations >= opts.max_iters // 4
        )

        d = ws.sobolev_direction(g)
        s_bb = ws.bb_step(path[k], d, prev_vals, prev_d) if k == prev_k else None
        prev_k = k
        prev_vals = path[k].copy()
        prev_d = d.copy()
        lenient = s_bb is not None
        s_start = s_bb if lenient else s_prev * rule.grow
        if not crest_phase:
            # tube condition: while the path is still moving globally, the
            # vertex must stay within reach of its neighbors, otherwise
            # segments cross the ridge unnoticed; in the crest phase the ray
            # maximization re-anchors the vertex instead
            d_len = math.sqrt(ws.pair(d, d))
            reach = 0.5 * min(
                seg_len(path[k], path[k - 1]), seg_len(path[k], path[k + 1])
            )
            s_start = min(s_start, max(reach / max(d_len, 1e-300), 1e-12))
        new_vals, new_e, s_used, ok = _armijo_step(
            ws, path[k], energies[k], g, d, rule, s_start, lenient_first=lenient
        )
        if ok:
            path[k] = new_vals
            energies[k] = new_e
            s_prev = s_used

        if not crest_phase and opts.relax_every and iterations % opts.relax_every == 0:
            # relax only crest nodes (near-ties with the max); valley-side
            # nodes must stay put, since the energy is unbounded below and
            # repeated descent would run them away
            crest_floor = energies[k] - 0.05 * abs(energies[k]) - 1e-12
            for j in range(1, len(path) - 1):
                if j == k or energies[j] < crest_floor:
                    continue
                gj = ws.gradient(path[j])
                dj = ws.sobolev_direction(gj)
                dj_len = math.sqrt(ws.pair(dj, dj))
                reach_j = 0.5 * min(seg_len(path[j], path[j - 1]), seg_len(path[j], path[j + 1]))
                cap_j = max(reach_j / max(dj_len, 1e-300), 1e-12)
                vj, ej, _, okj = _armijo_step(
                    ws, path[j], energies[j], gj, dj, rule, min(s_prev, cap_j)
                )
                if okj:
                    path[j] = vj
                    energies[j] = ej

        if not crest_phase:
            needs_thinning = len(path) > 4 * opts.path_points
            if needs_thinning or (
                opts.redistribute_every and iterations % opts.redistribute_every == 0
            ):
                top = path[int(np.argmax(energies[1:-1])) + 1]
                path = _redistribute_to(path, ws, opts.path_points)
                energies = [ws.energy(v) for v in path]
                # keep the crest vertex: reinsert the best point next to the
                # vertex closest to it
                j_near = min(
                    range(1, len(path) - 1), key=lambda j: seg_len(path[j], top)
                )
                if seg_len(path[j_near], top) > 1e-14:
                    path.insert(j_near, top)
                    energies.insert(j_near, ws.energy(top))

    return best, iterations, converged, path


def _build_report(
    vals: np.ndarray,
    params: ModelParams,
    grid: RadialGrid,
    mode: EnergyMode,
    iterations: int,
    opts: SolverOptions,
) -> SolutionReport:
    u = Field(grid, vals)
    phi_sol = solve_phi(u, params)
    phi = phi_sol.phi
    breakdown = reduced_energy(u, params, mode, phi=phi)
    g = reduced_gradient(u, params, mode, phi=phi)
    gn = gradient_norm(g)
    nontrivial = field_norms(u, params.nonlinearity.p).lp > opts.collapse_tol
    nehari = nehari_residual(u, params, mode, phi=phi) if nontrivial else math.inf
    poho = pohozaev_residual(u, params, mode, phi=phi) if nontrivial else math.inf
    residuals = IdentityResiduals(nehari=nehari, pohozaev=poho, gradient_norm=gn)
    converged = bool(gn <= opts.grad_tol and nehari <= 1e-4 and nontrivial)
    return SolutionReport(
        u=u,
        phi=phi,
        energy=breakdown,
        residuals=residuals,
        norms_u=field_norms(u, params.nonlinearity.p),
        norms_phi=field_norms(phi, 2.0),
        iterations=iterations,
        level_estimate=breakdown.total,
        converged=converged,
    )


def mountain_pass_solve(
    params: ModelParams,
    grid: RadialGrid,
    opts: SolverOptions,
    mode: EnergyMode,
    initial_path: Optional[List[np.ndarray]] = None,
) -> SolutionReport:
    """Find a critical point by relaxing a discrete mountain-pass path.

    The path runs from the zero field to an endpoint with negative energy
    (the seed amplitude is doubled until the endpoint qualifies, validated
    at the bottom of the homotopy window so the same path works for every
    lam in [delta, 1]).  While the path localizes the pass basin, each
    iteration probes segment midpoints for a hidden crest, descends the
    vertex maximum along the preconditioned gradient under a tube condition,
    and periodically relaxes and re-equidistributes the crest nodes.  Once
    the gradient is small the iteration follows the crest directly:
    re-maximize along the ray through the current maximum (the local path
    parametrization near the top), then descend transversally.  On MaxIters
    exhaustion the best iterate is returned with converged=False.
    """
    best, iterations, _, _ = _mountain_pass_core(params, grid, opts, mode, initial_path)
    return _build_report(best, params, grid, mode, iterations, opts)


# --------------------------------------------------------------------------
# Nehari-manifold descent
# --------------------------------------------------------------------------

def _fiber_slope(ws: _Workspace, vals: np.ndarray, t: float) -> float:
    """d/dt I(t u) = <I'(t u), u>."""
    return ws.pair(ws.gradient(t * vals), vals)


def _project_to_nehari(ws: _Workspace, vals: np.ndarray, t_guess: float = 1.0) -> float:
    """Positive root of the fibering slope, by bracketing + brentq."""
    t_hi = max(t_guess, 1e-8)
    s_hi = _fiber_slope(ws, vals, t_hi)
    doublings = 0
    while s_hi > 0.0:
        t_hi *= 2.0
        s_hi = _fiber_slope(ws, vals, t_hi)
        doublings += 1
        if doublings > 80:
            raise ProjectionFailed("fibering slope stayed positive up to huge amplitudes")
    if s_hi == 0.0:
        return t_hi
    t_lo = t_hi / 2.0
    s_lo = _fiber_slope(ws, vals, t_lo)
    halvings = 0
    while s_lo < 0.0:
        t_hi, s_hi = t_lo, s_lo
        t_lo /= 2.0
        s_lo = _fiber_slope(ws, vals, t_lo)
        halvings += 1
        if halvings > 80:
            raise ProjectionFailed("fibering slope stayed negative down to zero amplitude")
    if s_lo == 0.0:
        return t_lo
    return float(brentq(lambda t: _fiber_slope(ws, vals, t), t_lo, t_hi, xtol=1e-14, rtol=8.9e-16))


def nehari_descent(
    params: ModelParams,
    grid: RadialGrid,
    opts: SolverOptions,
    mode: EnergyMode,
    initial_u: Optional[np.ndarray] = None,
) -> SolutionReport:
    """Descend the energy constrained to the Nehari set <I'(u), u> = 0.

    Alternates a scalar fibering projection (root of d/dt I(t u), with the
    potential re-solved at every amplitude), a preconditioned descent step,
    and re-projection.  The constrained minimizer is an unconstrained
    critical point, so termination still tests the free gradient norm.
    """
    ws = _Workspace(params, grid, mode)
    rule = opts.step_rule

    vals = initial_u.copy() if initial_u is not None else opts.seed_profile.build(grid)
    if ws.lp_norm(vals) < opts.collapse_tol:
        raise CollapseToZero("seed has no mass to project")
    t0 = _project_to_nehari(ws, vals)
    vals = t0 * vals
    e0 = ws.energy(vals)

    s_prev = rule.s_init
    iterations = 0
    converged = False
    prev_vals: Optional[np.ndarray] = None
    prev_d: Optional[np.ndarray] = None
    # the energy is coercive on the constraint set, so a non-monotone
    # (windowed) acceptance is safe and lets the BB steps run freely
    window = deque([e0], maxlen=10)
    while iterations < opts.max_iters:
        iterations += 1
        g = ws.gradient(vals)
        gn = ws.grad_norm(g)
        if gn <= opts.grad_tol:
            converged = True
            break
        if ws.lp_norm(vals) < opts.collapse_tol:
            raise CollapseToZero("iterate collapsed to zero")

        d = ws.sobolev_direction(g)
        slope = ws.pair(g, d)
        s_bb = ws.bb_step(vals, d, prev_vals, prev_d)
        prev_vals = vals.copy()
        prev_d = d.copy()
        lenient = s_bb is not None
        s = min(max(s_bb if lenient else s_prev * rule.grow, 1e-12), rule.s_max)
        e_ref = max(window)
        floor = 1e3 * np.finfo(float).eps * max(1.0, abs(e_ref))
        accepted = False
        first = True
        for _ in range(rule.max_backtracks):
            trial = vals - s * d
            try:
                t_star = _project_to_nehari(ws, trial, t_guess=1.0)
            except ProjectionFailed:
                s *= rule.shrink
                first = False
                continue
            trial = t_star * trial
            e1 = ws.energy(trial)
            good = e1 <= e_ref - rule.c1 * s * slope or (
                rule.c1 * s * slope < floor and e1 <= e_ref
            )
            if good or (first and lenient and e1 <= e_ref):
                vals, e0 = trial, e1
                window.append(e0)
                s_prev = s
                accepted = True
                break
            s *= rule.shrink
            first = False
        if not accepted:
            # line search exhausted at rounding level: report best effort
            break

    return _build_report(vals, params, grid, mode, iterations, opts)


def solve(
    params: ModelParams,
    grid: RadialGrid,
    opts: SolverOptions,
    mode: EnergyMode,
) -> SolutionReport:
    """Dispatch on ``opts.method``."""
    if opts.method == "nehari_descent":
        return nehari_descent(params, grid, opts, mode)
    return mountain_pass_solve(params, grid, opts, mode)


# --------------------------------------------------------------------------
# Continuations
# --------------------------------------------------------------------------

def default_lambda_schedule(steps: int = 6, delta: float = _DELTA) -> List[float]:
    """Geometric homotopy weights from delta up to 1."""
    return [delta ** (1.0 - k / (steps - 1)) for k in range(steps)]


def lambda_continuation(
    params: ModelParams,
    grid: RadialGrid,
    opts: SolverOptions,
    lam_schedule: Optional[List[float]] = None,
) -> ContinuationTrace:
    """Walk the homotopy weight up to 1, warm-starting each solve.

    Requires the homogeneous nonlinearity inside the certified existence
    region (a certificate weight alpha is fixed once and the gradient-bound
    certificate is recorded at every step).  The gradient seminorm must not
    grow by more than 10x along the trace.
    """
    if not isinstance(params.nonlinearity, Power):
        raise ValueError("lambda continuation requires the Power nonlinearity")
    p = params.nonlinearity.p
    region = classify_existence(p, params.omega / params.m)
    if region is not Region.EXISTENCE_THM1:
        raise ValueError(
            f"(p={p}, omega/m={params.omega / params.m}) classifies as {region.value}; "
            "lambda continuation needs the certified existence region"
        )
    alpha_star = find_alpha(p, params.m, params.omega)
    schedule = lam_schedule if lam_schedule is not None else default_lambda_schedule()

    steps: List[ContinuationStep] = []
    prev_path: Optional[List[np.ndarray]] = None
    prev_u: Optional[np.ndarray] = None
    d12_initial: Optional[float] = None

    for lam in schedule:
        mode = EnergyMode.standard(lam)
        if opts.method == "mountain_pass":
            best, iters, _, prev_path = _mountain_pass_core(
                params, grid, opts, mode, initial_path=prev_path
            )
            report = _build_report(best, params, grid, mode, iters, opts)
        else:
            report = nehari_descent(params, grid, opts, mode, initial_u=prev_u)
        prev_u = report.u.values.copy()

        d12 = report.norms_u.d12
        if d12_initial is None:
            d12_initial = d12
        elif d12 > 10.0 * d12_initial:
            raise BoundednessMonitorTripped(
                f"gradient seminorm grew {d12 / d12_initial:.2f}x at lam={lam}"
            )
        cert = boundedness_certificate(report.u, params, lam, alpha_star, phi=report.phi)
        w = grid.weights
        fprime_mass = lam * float(w @ np.abs(report.u.values) ** p)
        steps.append(
            ContinuationStep(parameter=lam, report=report, fprime_mass=fprime_mass, certificate=cert)
        )
    return ContinuationTrace(steps=steps)


def default_epsilon_schedule(eps0: float = 1.0, k_steps: int = 12) -> List[float]:
    """Geometric regularization schedule eps0 * 2^-k, k = 0..k_steps."""
    return [eps0 * 2.0**-k for k in range(k_steps + 1)]


def epsilon_continuation(
    params: ModelParams,
    grid: RadialGrid,
    opts: SolverOptions,
    eps_schedule: Optional[List[float]] = None,
) -> ContinuationTrace:
    """Walk the zero-mass regularization down to 0 at omega = m.

    Each positive-eps problem is a standard solve warm-started from the
    previous one; the final entry polishes the unregularized (eps = 0)
    problem from the last iterate, realizing the limit candidate (u0, phi0).
    Monitors: gradient seminorms of u and phi must stay within 10x of their
    first-step values, and int f'(u) u must stay above the mass-leak floor.
    """
    if not isinstance(params.nonlinearity, DoublePower):
        raise ValueError("epsilon continuation requires the DoublePower nonlinearity")
    if params.Omega > 1e-12 * max(1.0, params.m**2):
        raise ValueError(f"epsilon continuation requires omega = m, got Omega={params.Omega}")
    hyp = verify_f_hypotheses(params.nonlinearity, params.nonlinearity.alpha)
    if not hyp.passed:
        raise ValueError(f"nonlinearity failed hypothesis {hyp.failed} at t={hyp.witness}")

    schedule = eps_schedule if eps_schedule is not None else default_epsilon_schedule()
    if any(e <= 0.0 for e in schedule):
        raise ValueError("eps schedule must be positive (the eps=0 polish is appended)")

    steps: List[ContinuationStep] = []
    prev_path: Optional[List[np.ndarray]] = None
    prev_u: Optional[np.ndarray] = None
    d12_u0: Optional[float] = None
    d12_phi0: Optional[float] = None
    w = grid.weights

    def run(mode: EnergyMode) -> SolutionReport:
        nonlocal prev_path, prev_u
        if opts.method == "mountain_pass":
            best, iters, _, new_path = _mountain_pass_core(
                params, grid, opts, mode, initial_path=prev_path
            )
            prev_path = new_path
            report = _build_report(best, params, grid, mode, iters, opts)
        else:
            report = nehari_descent(params, grid, opts, mode, initial_u=prev_u)
        prev_u = report.u.values.copy()
        return report

    def monitor(report: SolutionReport, eps: float) -> float:
        nonlocal d12_u0, d12_phi0
        d12_u = report.norms_u.d12
        d12_phi = report.norms_phi.d12
        if d12_u0 is None:
            d12_u0, d12_phi0 = d12_u, d12_phi
        elif d12_u > 10.0 * d12_u0 or (d12_phi0 > 0 and d12_phi > 10.0 * d12_phi0):
            raise UniformBoundViolated(
                f"gradient seminorms ({d12_u:.3g}, {d12_phi:.3g}) exceeded 10x the "
                f"first-step values at eps={eps}"
            )
        _, fp = eval_f(params.nonlinearity, report.u.values)
        fprime_mass = float(w @ (fp * report.u.values))
        if fprime_mass < 1e-6:
            raise MassLeak(f"int f'(u) u = {fprime_mass:.3e} at eps={eps}")
        return fprime_mass

    for eps in schedule:
        mode = EnergyMode.zero_mass(eps)
        report = run(mode)
        fprime_mass = monitor(report, eps)
        steps.append(ContinuationStep(parameter=eps, report=report, fprime_mass=fprime_mass))

    mode0 = EnergyMode.zero_mass(0.0)
    report0 = run(mode0)
    fprime_mass0 = monitor(report0, 0.0)
    steps.append(ContinuationStep(parameter=0.0, report=report0, fprime_mass=fprime_mass0))
    return ContinuationTrace(steps=steps)


# --------------------------------------------------------------------------
# Shooting oracle for the decoupled scalar equation
# --------------------------------------------------------------------------

def shoot_scalar_profile(
    omega_gap: float,
    p: float,
    r_span: float,
    s_tol: float = 1e-10,
) -> Callable[[np.ndarray], np.ndarray]:
    """Ground-state profile of -u'' - (2/r) u' + Omega u = |u|^(p-2) u.

    Returns a callable evaluating the positive radial ground state, found by
    bisecting the initial height u(0) between the overshoot regime (u dips
    through zero) and the undershoot regime (u turns around and grows).  The
    numeric trajectory is extended past its reliable range by the exact
    linear far-field tail C * exp(-sqrt(Omega) r) / r.
    """
    if not omega_gap > 0.0:
        raise ValueError(f"Omega={omega_gap} must be positive")
    if not 2.0 < p < 6.0:
        raise ValueError(f"p={p} outside (2, 6)")
    k = math.sqrt(omega_gap)
    r0 = 1e-6

    def rhs(r, y):
        u, v = y
        return [v, -2.0 * v / r + omega_gap * u - np.abs(u) ** (p - 2.0) * u]

    def crossing(r, y):
        return y[0]

    crossing.terminal = True
    crossing.direction = -1.0

    def blowup(r, y):
        return y[0] - 10.0 * max(1.0, s_hi_box[0])

    blowup.terminal = True
    blowup.direction = 1.0

    s_hi_box = [1.0]

    def shot(s, dense=False):
        a = (omega_gap * s - abs(s) ** (p - 2.0) * s) / 6.0
        y0 = [s + a * r0 * r0, 2.0 * a * r0]
        sol = solve_ivp(
            rhs,
            (r0, r_span),
            y0,
            method="RK45",
            rtol=1e-10,
            atol=1e-13,
            events=(crossing, blowup),
            dense_output=dense,
        )
        if sol.t_events[0].size:
            kind = "over"
        elif sol.t_events[1].size:
            kind = "under"
        else:
            u_end, v_end = sol.y[0][-1], sol.y[1][-1]
            kind = "under" if v_end + k * u_end > 0.0 else "over"
        return kind, sol

    # bracket the ground-state height
    s_lo = None
    s_hi = None
    s = max(1.0, omega_gap ** (1.0 / (p - 2.0)))
    for _ in range(200):
        s_hi_box[0] = s
        kind, _ = shot(s)
        if kind == "over":
            s_hi = s
            break
        s_lo = s
        s *= 2.0
    if s_hi is None:
        raise BisectionStalled("no overshoot found while doubling the initial height")
    if s_lo is None:
        s = s_hi / 2.0
        for _ in range(200):
            s_hi_box[0] = s
            kind, _ = shot(s)
            if kind == "under":
                s_lo = s
                break
            s_hi = s
            s /= 2.0
        if s_lo is None:
            raise BisectionStalled("no undershoot found while halving the initial height")

    while s_hi - s_lo > s_tol:
        s_mid = 0.5 * (s_lo + s_hi)
        if s_mid in (s_lo, s_hi):
            break
        s_hi_box[0] = s_hi
        kind, _ = shot(s_mid)
        if kind == "over":
            s_hi = s_mid
        else:
            s_lo = s_mid

    s_star = 0.5 * (s_lo + s_hi)
    s_hi_box[0] = s_hi
    _, sol = shot(s_star, dense=True)

    # matching radius: last point where the trajectory is still clean
    r_end = sol.t[-1]
    floor = 1e-6 * s_star
    rs = np.linspace(r0, r_end, 4000)
    us = sol.sol(rs)[0]
    below = np.nonzero(us <= floor)[0]
    r_match = rs[below[0]] if below.size else r_end
    u_match = float(sol.sol(r_match)[0])
    tail_c = u_match * r_match * math.exp(k * r_match)

    def profile(r):
        r = np.asarray(r, dtype=float)
        out = np.empty_like(r)
        inside = r < r_match
        if inside.any():
            out[inside] = sol.sol(r[inside])[0]
        far = ~inside
        if far.any():
            rf = r[far]
            out[far] = tail_c * np.exp(-k * rf) / rf
        return out

    return profile


def shoot_scalar_field(omega_gap: float, p: float, grid: RadialGrid) -> Field:
    """Sample the shooting ground state on a radial grid."""
    profile = shoot_scalar_profile(omega_gap, p, r_span=grid.r_max)
    return Field(grid, profile(grid.nodes))

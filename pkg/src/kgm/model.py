"""Radial discretization, quadrature, norms, and the nonlinearity family.

All fields are radially symmetric functions on a ball of radius ``r_max``,
sampled on the uniform nodes r_i = i*h, i = 1..n, h = r_max/n.  The center
r = 0 is not a node: even symmetry (u'(0) = 0) is built into the discrete
operators by slaving the r = 0 value to the first node, and the outer
boundary carries a homogeneous Dirichlet condition realized through a zero
ghost value one spacing past r_max.

Volume integrals 4*pi * int_0^R g(r) r^2 dr use the trapezoid rule in g with
the r^2 Jacobian integrated exactly per segment (piecewise-linear interpolant
of g against the exact measure).  That keeps every weight nonnegative and
reproduces the ball volume to machine precision.  The gradient seminorm is
the exact Dirichlet energy of the same piecewise-linear interpolant, so the
stiffness form in :mod:`kgm.phi_reduction` and :mod:`kgm.energy` is its exact
algebraic gradient.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Optional, Union

import numpy as np

from .errors import NonFiniteInput

__all__ = [
    "Power",
    "DoublePower",
    "Nonlinearity",
    "ModelParams",
    "RadialGrid",
    "Field",
    "FieldNorms",
    "FHypothesesReport",
    "make_grid",
    "integrate",
    "gradient_seminorm",
    "stiffness_matvec",
    "eval_f",
    "verify_f_hypotheses",
    "field_from_function",
    "field_norms",
]


# --------------------------------------------------------------------------
# Nonlinearities
# --------------------------------------------------------------------------

@dataclass(frozen=True)
class Power:
    """Homogeneous self-interaction f(t) = |t|^p / p.

    Nontrivial standing waves exist only in the subcritical window
    2 < p < 6; larger exponents are representable so that runs in the
    nonexistence region can still be attempted deliberately (they are
    expected to collapse or fail to converge).
    """

    p: float

    def __post_init__(self):
        if not 2.0 < self.p < 10.0:
            raise ValueError(f"Power exponent p={self.p} outside (2, 10)")


@dataclass(frozen=True)
class DoublePower:
    """Inhomogeneous self-interaction for the zero-mass regime.

    f(t) = |t|^q / (1 + |t|^(q-p)) behaves like |t|^q near zero (supercritical)
    and like |t|^p at infinity (subcritical), with 4 < alpha <= p < 6 < q.
    ``alpha`` is the superquadraticity constant: alpha * f(t) <= f'(t) t holds
    for every t != 0, which :func:`verify_f_hypotheses` checks numerically
    instead of assuming.
    """

    p: float = 5.0
    q: float = 7.0
    alpha: float = 5.0

    def __post_init__(self):
        if not (4.0 < self.alpha <= self.p < 6.0 < self.q):
            raise ValueError(
                f"DoublePower requires 4 < alpha <= p < 6 < q, "
                f"got alpha={self.alpha}, p={self.p}, q={self.q}"
            )


Nonlinearity = Union[Power, DoublePower]


def eval_f(nl: Nonlinearity, t):
    """Evaluate the self-interaction and its derivative at ``t``.

    Accepts scalars or arrays; returns the pair (f(t), f'(t)) with the same
    shape.  f'(0) = 0 by construction for both variants.
    """
    t = np.asarray(t, dtype=float)
    s = np.abs(t)
    if isinstance(nl, Power):
        p = nl.p
        f = s**p / p
        fp = s ** (p - 2.0) * t
        return (float(f), float(fp)) if f.ndim == 0 else (f, fp)

    p, q = nl.p, nl.q
    f = np.empty_like(s)
    fpm = np.empty_like(s)
    lo = s <= 1.0
    hi = ~lo
    # |t| <= 1: powers of s stay bounded by 1
    sl = s[lo]
    dl = 1.0 + sl ** (q - p)
    f[lo] = sl**q / dl
    fpm[lo] = sl ** (q - 1.0) * (q + p * sl ** (q - p)) / dl**2
    # |t| > 1: divide through by s^(q-p) so all exponents are negative
    sh = s[hi]
    dh = 1.0 + sh ** (p - q)
    f[hi] = sh**p / dh
    fpm[hi] = sh ** (p - 1.0) * (p + q * sh ** (p - q)) / dh**2
    fp = np.where(t >= 0.0, fpm, -fpm)
    return (float(f), float(fp)) if f.ndim == 0 else (f, fp)


@dataclass(frozen=True)
class FHypothesesReport:
    """Outcome of the numerical hypothesis check for a nonlinearity.

    ``min_ratio`` is the sampled minimum of f'(t) t / f(t); ``c1_best`` the
    largest constant with f >= c1 * min(|t|^p, |t|^q) over the samples, and
    ``c2_best`` the smallest constant with |f'| <= c2 * min(|t|^(p-1),
    |t|^(q-1)).  ``witness`` is a sample where the first failed hypothesis is
    violated, or None.
    """

    passed: bool
    min_ratio: float
    c1_stored: float
    c2_stored: float
    c1_best: float
    c2_best: float
    failed: Optional[str] = None
    witness: Optional[float] = None


def _growth_constants(nl: Nonlinearity) -> tuple[float, float, float, float]:
    """(p, q, C1, C2) for the two-sided growth bounds of f and f'."""
    if isinstance(nl, Power):
        return nl.p, nl.p, 1.0 / nl.p, 1.0
    # f = s^q/(1+s^(q-p)) >= min(s^p, s^q)/2 with equality at |t| = 1;
    # |f'| <= (p+q) min(s^(p-1), s^(q-1)) by splitting at |t| = 1.
    return nl.p, nl.q, 0.5, nl.p + nl.q


def verify_f_hypotheses(nl: Nonlinearity, alpha: float, samples: int = 4000) -> FHypothesesReport:
    """Check the superquadraticity and growth hypotheses on a log sample grid.

    Samples t over +-[1e-8, 1e8] and tests, with a 1e-9 slack for rounding:

    * alpha * f(t) <= f'(t) t  (requires alpha > 4),
    * f(t) >= C1 * min(|t|^p, |t|^q) with the stored C1,
    * |f'(t)| <= C2 * min(|t|^(p-1), |t|^(q-1)) with the stored C2.
    """
    if not alpha > 4.0:
        raise ValueError(f"alpha={alpha} must exceed 4")
    p, q, c1_stored, c2_stored = _growth_constants(nl)
    ts = np.logspace(-8.0, 8.0, samples)
    ts = np.concatenate([ts, -ts])
    f, fp = eval_f(nl, ts)
    s = np.abs(ts)

    ratio = fp * ts / f
    min_ratio = float(ratio.min())
    lower = np.minimum(s**p, s**q)
    lower_prime = np.minimum(s ** (p - 1.0), s ** (q - 1.0))
    c1_best = float((f / lower).min())
    c2_best = float((np.abs(fp) / lower_prime).max())

    slack = 1e-9
    failed = None
    witness = None
    bad_f2 = ratio < alpha - slack
    bad_f3 = f < c1_stored * lower * (1.0 - 1e-12) - 1e-300
    bad_f4 = np.abs(fp) > c2_stored * lower_prime * (1.0 + 1e-12) + 1e-300
    for name, bad in (("f2", bad_f2), ("f3", bad_f3), ("f4", bad_f4)):
        if bad.any():
            failed = name
            witness = float(ts[np.argmax(bad)])
            break
    return FHypothesesReport(
        passed=failed is None,
        min_ratio=min_ratio,
        c1_stored=c1_stored,
        c2_stored=c2_stored,
        c1_best=c1_best,
        c2_best=c2_best,
        failed=failed,
        witness=witness,
    )


# --------------------------------------------------------------------------
# Model parameters
# --------------------------------------------------------------------------

@dataclass(frozen=True)
class ModelParams:
    """Physical constants of the system: mass m, frequency omega, coupling e.

    Sign normalization: omega > 0 always; e >= 0, where e = 0 decouples the
    electrostatic potential (phi = 0) and is kept available as the diagnostic
    regime matched against the scalar-field shooting oracle.  The derived
    quantity Omega = m^2 - omega^2 must be nonnegative; Omega = 0 is exactly
    the zero-mass regime omega = m.
    """

    m: float
    omega: float
    e: float
    nonlinearity: Nonlinearity

    def __post_init__(self):
        if not self.m >= 0.0:
            raise ValueError(f"m={self.m} must be >= 0")
        if not self.omega > 0.0:
            raise ValueError(f"omega={self.omega} must be > 0")
        if not self.e >= 0.0:
            raise ValueError(f"e={self.e} must be >= 0")
        if self.Omega < 0.0:
            raise ValueError(
                f"m^2 - omega^2 = {self.Omega} is negative; omega must not exceed m"
            )

    @property
    def Omega(self) -> float:
        """Effective mass coefficient m^2 - omega^2 of the linear term."""
        return self.m * self.m - self.omega * self.omega


# --------------------------------------------------------------------------
# Grid, fields, quadrature
# --------------------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class RadialGrid:
    """Uniform radial mesh with volume-quadrature weights and segment moments.

    ``weights[i]`` integrates nodal samples against 4*pi*r^2 dr exactly for
    piecewise-linear data, so ``weights.sum() == 4/3*pi*r_max^3`` up to
    rounding.  ``seg_moments[i] = (r_{i+1}^3 - r_i^3)/3`` for the n-1 interior
    segments plus the ghost segment [r_max, r_max + h] used by the Dirichlet
    closure of the stiffness form.
    """

    n: int
    r_max: float
    nodes: np.ndarray
    weights: np.ndarray
    seg_moments: np.ndarray  # length n: interior segments then ghost

    @property
    def h(self) -> float:
        return self.r_max / self.n

    def __repr__(self):  # ndarray fields make the default repr unreadable
        return f"RadialGrid(n={self.n}, r_max={self.r_max})"


def make_grid(n: int, r_max: float) -> RadialGrid:
    """Build the uniform radial grid with product-trapezoid volume weights."""
    if n < 16:
        raise ValueError(f"n={n} is too coarse; need n >= 16")
    if not r_max > 0.0:
        raise ValueError(f"r_max={r_max} must be positive")
    h = r_max / n
    r = h * np.arange(1, n + 1)

    # int_a^b r^2 (r-a)/h dr and int_a^b r^2 (b-r)/h dr for each segment [a, b]
    a = r - h
    b = r
    rising = ((b**4 - a**4) / 4.0 - a * (b**3 - a**3) / 3.0) / h
    falling = (b * (b**3 - a**3) / 3.0 - (b**4 - a**4) / 4.0) / h

    mu = np.zeros(n)
    mu[0] = h**3 / 3.0          # [0, r_1]: center value slaved to node 1
    mu[1:] += rising[1:]        # left wings
    mu[:-1] += falling[1:]      # right wings
    weights = 4.0 * math.pi * mu

    seg = np.empty(n)
    seg[: n - 1] = (r[1:] ** 3 - r[: n - 1] ** 3) / 3.0
    seg[n - 1] = ((r_max + h) ** 3 - r_max**3) / 3.0  # ghost segment

    for arr in (r, weights, seg):
        arr.flags.writeable = False
    return RadialGrid(n=n, r_max=float(r_max), nodes=r, weights=weights, seg_moments=seg)


@dataclass(frozen=True, eq=False)
class Field:
    """Nodal samples of a radial function on its grid."""

    grid: RadialGrid
    values: np.ndarray

    def __post_init__(self):
        vals = np.asarray(self.values, dtype=float)
        if vals.shape != (self.grid.n,):
            raise ValueError(
                f"field has {vals.shape} values for a grid with n={self.grid.n}"
            )
        vals = vals.copy()
        vals.flags.writeable = False
        object.__setattr__(self, "values", vals)

    def __repr__(self):
        return f"Field(grid={self.grid!r}, max|u|={np.abs(self.values).max():.6g})"


def field_from_function(grid: RadialGrid, fn: Callable[[np.ndarray], np.ndarray]) -> Field:
    """Sample a radial profile ``fn`` on the grid nodes."""
    return Field(grid, np.asarray(fn(grid.nodes), dtype=float))


def _require_finite(vals: np.ndarray, what: str):
    if not np.isfinite(vals).all():
        raise NonFiniteInput(f"{what} contains non-finite samples")


def integrate(g: Field) -> float:
    """Discrete volume integral of a nodal field over the ball."""
    _require_finite(g.values, "integrand")
    return float(g.grid.weights @ g.values)


def _dirichlet_energy(grid: RadialGrid, vals: np.ndarray) -> float:
    """4*pi * int u'(r)^2 r^2 dr of the piecewise-linear interpolant.

    The interpolant is flat on [0, r_1] (even symmetry) and descends to the
    zero ghost value on [r_max, r_max + h].
    """
    d = np.diff(vals)
    m = grid.seg_moments
    q = float(m[:-1] @ (d * d) + m[-1] * vals[-1] * vals[-1])
    return 4.0 * math.pi * q / (grid.h * grid.h)


def gradient_seminorm(u: Field) -> float:
    """Discrete gradient seminorm ( 4*pi * int u'^2 r^2 dr )^(1/2)."""
    _require_finite(u.values, "field")
    return math.sqrt(_dirichlet_energy(u.grid, u.values))


def stiffness_matvec(grid: RadialGrid, vals: np.ndarray) -> np.ndarray:
    """Apply the stiffness operator K with u^T K u = gradient_seminorm(u)^2.

    Row i of K/w_i is the second-order radial Laplacian -u'' - (2/r) u' with
    the even-symmetry closure at the center and the zero ghost at r_max + h.
    """
    m = grid.seg_moments
    coef = 4.0 * math.pi / (grid.h * grid.h)
    d = np.diff(vals)
    flux = m[:-1] * d
    y = np.zeros_like(vals)
    y[:-1] -= flux
    y[1:] += flux
    y[-1] += m[-1] * vals[-1]
    return coef * y


@dataclass(frozen=True)
class FieldNorms:
    """Discrete norms of a field: gradient seminorm, L2, Lp, and H1."""

    d12: float
    l2: float
    lp: float
    h1: float


def field_norms(u: Field, p: float) -> FieldNorms:
    """Compute the standard norm bundle of a field (Lp for the requested p)."""
    _require_finite(u.values, "field")
    w = u.grid.weights
    vals = u.values
    d12 = gradient_seminorm(u)
    l2sq = float(w @ (vals * vals))
    lp = float(w @ np.abs(vals) ** p) ** (1.0 / p)
    return FieldNorms(d12=d12, l2=math.sqrt(l2sq), lp=lp, h1=math.sqrt(d12 * d12 + l2sq))

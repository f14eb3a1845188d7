"""Existence thresholds and the certificate algebra behind them.

For the homogeneous nonlinearity with exponent p in (2, 4), boundedness of
the continuation iterates hinges on a one-parameter family of coefficient
triples

    A(p, alpha) = (1 + 2*alpha*(p-3)) / p,
    B(p, alpha) = (p - 10*alpha*p - 4 + 24*alpha) / (2p),
    C(p, alpha) = (p-2)*(1 - 6*alpha) / (2p),

which satisfy A + B = C identically and are combined into the quadratic

    q(t) = A t^2 + B*omega*t + C*(m^2 - omega^2),   t in [0, omega],

whose nonnegativity certifies a gradient-norm bound along the continuation.
For p in (3, 4) the weight alpha = (4-p)/(24-10p) kills B and the quadratic
is trivially nonnegative; for p in (2, 3] nonnegativity is equivalent to

    m^2/omega^2 >= K(p, alpha) := (A+C)^2 / (4AC),

and minimizing K over the admissible alpha interval

    I_p = ( (2-p) / (2*(6-p)),  1/6 )

gives the closed form inf K = 1 / ((p-2)*(4-p)).  The resulting frequency
threshold in the (p, omega/m) plane is

    g(p) = sqrt((p-2)*(4-p))  for 2 < p < 3,    g(p) = 1  for 3 <= p < 4,

which dominates the older threshold g0(p) = sqrt((p-2)/2); together with the
classical p in (4, 6) region and the nonexistence facts for p <= 2 or p >= 6
this yields the existence classifier used by the sweep command.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum
from typing import Optional

import numpy as np

from .errors import AlphaOutOfRange, NoAlpha

__all__ = [
    "CoefficientTriple",
    "Region",
    "ThresholdReport",
    "QuadraticCheck",
    "coefficients",
    "admissible_alpha_interval",
    "critical_ratio_sq",
    "min_critical_ratio_sq",
    "threshold_curve",
    "threshold_curve_legacy",
    "find_alpha",
    "check_quadratic_nonneg",
    "classify_existence",
    "threshold_report",
]

_AC_MARGIN = 1e-9


@dataclass(frozen=True)
class CoefficientTriple:
    """Certificate coefficients at a given (p, alpha), with a + b = c."""

    a: float
    b: float
    c: float
    p: float
    alpha: float


def coefficients(p: float, alpha: float, _sabotage: bool = False) -> CoefficientTriple:
    """Evaluate the three certificate coefficients at (p, alpha).

    ``_sabotage`` flips the sign of b; it exists solely so the self-test
    harness can prove the a + b = c invariant check actually fires.
    """
    if not 2.0 < p < 6.0:
        raise ValueError(f"p={p} outside (2, 6)")
    a = (1.0 + 2.0 * alpha * (p - 3.0)) / p
    b = (p - 10.0 * alpha * p - 4.0 + 24.0 * alpha) / (2.0 * p)
    c = (p - 2.0) * (1.0 - 6.0 * alpha) / (2.0 * p)
    if _sabotage:
        b = -b
    return CoefficientTriple(a=a, b=b, c=c, p=p, alpha=alpha)


def admissible_alpha_interval(p: float) -> tuple[float, float]:
    """Open interval of certificate weights for which A > 0, C > 0 and the
    gradient coefficient of the combined identity is positive."""
    if not 2.0 < p < 4.0:
        raise ValueError(f"p={p} outside (2, 4)")
    return (2.0 - p) / (2.0 * (6.0 - p)), 1.0 / 6.0


def critical_ratio_sq(p: float, alpha: float) -> float:
    """K(p, alpha) = (A+C)^2/(4AC): the smallest admissible (m/omega)^2.

    Evaluated in the factored form p^2/(8(p-2)) * (1-2a)^2/(1-6a)
    * 1/(1+2a(p-3)); the quotient form agrees to rounding and is exercised
    by the test suite.
    """
    lo, hi = admissible_alpha_interval(p)
    if not lo <= alpha < hi:
        raise AlphaOutOfRange(f"alpha={alpha} outside [{lo}, {hi}) for p={p}")
    return (
        p * p
        / (8.0 * (p - 2.0))
        * (1.0 - 2.0 * alpha) ** 2
        / (1.0 - 6.0 * alpha)
        / (1.0 + 2.0 * alpha * (p - 3.0))
    )


def min_critical_ratio_sq(p: float) -> float:
    """Closed form of inf K over the admissible interval, for 2 < p <= 3.

    The factored form of K is increasing on the interval in this range, so
    the infimum is the (attained-in-the-limit) value at the lower endpoint,
    1/((p-2)(4-p)).
    """
    if not 2.0 < p <= 3.0:
        raise ValueError(f"closed-form infimum applies to 2 < p <= 3, got p={p}")
    return 1.0 / ((p - 2.0) * (4.0 - p))


def threshold_curve(p: float) -> float:
    """Frequency-ratio threshold below which existence is certified."""
    if not 2.0 < p < 4.0:
        raise ValueError(f"p={p} outside (2, 4)")
    if p < 3.0:
        return math.sqrt((p - 2.0) * (4.0 - p))
    return 1.0


def threshold_curve_legacy(p: float) -> float:
    """The earlier, smaller frequency-ratio threshold sqrt((p-2)/2)."""
    if not 2.0 < p <= 4.0:
        raise ValueError(f"p={p} outside (2, 4]")
    return math.sqrt((p - 2.0) / 2.0)


def find_alpha(p: float, m: float, omega: float) -> float:
    """Pick a certificate weight alpha that makes the quadratic nonnegative.

    For p in (3, 4) the B = 0 weight (4-p)/(24-10p) works for every
    admissible frequency.  For p in (2, 3] the weight is found by geometric
    bisection from the lower endpoint of the admissible interval: K is
    increasing there, so the first probe alpha with
    K(p, alpha) <= (m/omega)^2 - margin is returned.
    """
    if not 2.0 < p < 4.0:
        raise ValueError(f"p={p} outside (2, 4)")
    if not (m > 0.0 and 0.0 < omega < m * threshold_curve(p)):
        raise NoAlpha(
            f"no certificate weight: omega={omega} not inside (0, {m * threshold_curve(p)})"
        )
    lo, hi = admissible_alpha_interval(p)
    if p > 3.0:
        alpha = (4.0 - p) / (24.0 - 10.0 * p)
        if not lo < alpha < hi:
            raise NoAlpha(f"B=0 weight {alpha} left the admissible interval")
        return alpha

    target = (m / omega) ** 2 - _AC_MARGIN
    span = hi - lo
    for k in range(1, 200):
        alpha = lo + span * 0.5**k
        if alpha <= lo:
            break
        if critical_ratio_sq(p, alpha) <= target:
            return alpha
    raise NoAlpha(
        f"bisection from the lower endpoint found no alpha with "
        f"K(p, alpha) <= {target} for p={p}"
    )


@dataclass(frozen=True)
class QuadraticCheck:
    """Outcome of the certificate-quadratic scan on [0, omega]."""

    passed: bool
    min_value: float
    witness: Optional[float] = None


def check_quadratic_nonneg(
    p: float, alpha: float, m: float, omega: float, scan_points: int = 10001
) -> QuadraticCheck:
    """Verify A t^2 + B*omega*t + C*Omega >= 0 on [0, omega].

    Runs both a dense grid scan and the analytic vertex test (minimum at
    t = -B*omega/(2A), clipped to the interval); the two must agree.  On
    failure the witness is the grid point with the most negative value.
    """
    lo, hi = admissible_alpha_interval(p)
    if not lo <= alpha < hi:
        raise AlphaOutOfRange(f"alpha={alpha} outside [{lo}, {hi}) for p={p}")
    trip = coefficients(p, alpha)
    Omega = m * m - omega * omega

    def q(t):
        return trip.a * t * t + trip.b * omega * t + trip.c * Omega

    ts = np.linspace(0.0, omega, scan_points)
    vals = q(ts)
    grid_min = float(vals.min())

    # analytic minimum: vertex if it lies inside the interval, else endpoints
    t_vertex = -trip.b * omega / (2.0 * trip.a)
    candidates = [0.0, omega] + ([t_vertex] if 0.0 <= t_vertex <= omega else [])
    exact_min = min(q(t) for t in candidates)

    tol = 1e-12 * max(1.0, abs(trip.a) * omega * omega, abs(trip.c) * abs(Omega))
    grid_pass = grid_min >= -tol
    exact_pass = exact_min >= -tol
    if grid_pass != exact_pass:
        raise AssertionError(
            f"grid scan and vertex test disagree: grid_min={grid_min}, exact_min={exact_min}"
        )
    witness = None if grid_pass else float(ts[int(np.argmin(vals))])
    return QuadraticCheck(passed=grid_pass, min_value=min(grid_min, exact_min), witness=witness)


class Region(str, Enum):
    """Existence classification of a (p, omega/m) parameter point."""

    EXISTENCE_THM1 = "ExistenceThm1"
    EXISTENCE_BF = "ExistenceBF"
    EXISTENCE_DM = "ExistenceDM"
    NONEXISTENCE = "Nonexistence"
    UNKNOWN = "Unknown"


def classify_existence(p: float, omega_ratio: float) -> Region:
    """Classify a parameter point against the known existence results.

    * 2 < p < 4 and ratio < g(p): certified by the improved threshold.
    * p = 4 and ratio < 1: covered by the legacy threshold g0(4) = 1.
    * 4 < p < 6 and ratio < 1: the classical supercubic region.
    * p <= 2, or p >= 6 with ratio <= 1: no nontrivial solutions.
    * anything else: no applicable result.
    """
    if not omega_ratio > 0.0:
        raise ValueError(f"omega_ratio={omega_ratio} must be positive")
    if p <= 2.0:
        return Region.NONEXISTENCE
    if p >= 6.0:
        return Region.NONEXISTENCE if omega_ratio <= 1.0 else Region.UNKNOWN
    if p < 4.0:
        return Region.EXISTENCE_THM1 if omega_ratio < threshold_curve(p) else Region.UNKNOWN
    if p == 4.0:
        return Region.EXISTENCE_DM if omega_ratio < threshold_curve_legacy(4.0) else Region.UNKNOWN
    return Region.EXISTENCE_BF if omega_ratio < 1.0 else Region.UNKNOWN


@dataclass(frozen=True)
class ThresholdReport:
    """Threshold quantities and classification at one (p, m, omega)."""

    p: float
    g_of_p: float
    g0_of_p: float
    inf_kp: float
    alpha_star: Optional[float]
    certificate: Optional[QuadraticCheck]
    region: Region


def _numeric_inf_kp(p: float, points: int = 200001) -> float:
    """Grid infimum of K over the admissible interval (any p in (2, 4))."""
    lo, hi = admissible_alpha_interval(p)
    alphas = np.linspace(lo, hi, points, endpoint=False)
    a = (1.0 + 2.0 * alphas * (p - 3.0)) / p
    c = (p - 2.0) * (1.0 - 6.0 * alphas) / (2.0 * p)
    k = (a + c) ** 2 / (4.0 * a * c)
    return float(k.min())


def threshold_report(p: float, m: float, omega: float) -> ThresholdReport:
    """Assemble the full threshold bundle for one parameter point."""
    if not 2.0 < p < 4.0:
        raise ValueError(f"threshold report needs p in (2, 4), got p={p}")
    inf_kp = min_critical_ratio_sq(p) if p <= 3.0 else _numeric_inf_kp(p)
    try:
        alpha_star = find_alpha(p, m, omega)
        cert = check_quadratic_nonneg(p, alpha_star, m, omega)
    except NoAlpha:
        alpha_star = None
        cert = None
    return ThresholdReport(
        p=p,
        g_of_p=threshold_curve(p),
        g0_of_p=threshold_curve_legacy(p),
        inf_kp=inf_kp,
        alpha_star=alpha_star,
        certificate=cert,
        region=classify_existence(p, omega / m),
    )

"""Figure rendering for the report paths.

Every CLI command that writes delimited output can also render a matplotlib
figure next to it.  Rendering always goes to files (Agg backend, no display);
figures are diagnostic companions to the CSV/JSON data, never the data
itself.
"""

from __future__ import annotations

from pathlib import Path
from typing import Sequence

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

from .thresholds import ThresholdReport, admissible_alpha_interval, critical_ratio_sq
from .variational_solver import ContinuationTrace, SolutionReport

__all__ = [
    "plot_profiles",
    "plot_trace",
    "plot_region_map",
    "plot_certificate_curve",
]

plt.rcParams["figure.figsize"] = (6.4, 4.2)
plt.rcParams["font.size"] = 9
plt.rcParams["axes.grid"] = True
plt.rcParams["grid.alpha"] = 0.3


def _finish(fig, path: Path) -> None:
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)


def plot_profiles(path: Path, report: SolutionReport, title: str = "") -> None:
    """Matter field and potential profiles of a converged solve."""
    r = report.u.grid.nodes
    fig, ax = plt.subplots()
    ax.plot(r, report.u.values, label="u(r)", color="tab:blue")
    ax.plot(r, report.phi.values, label="phi(r)", color="tab:orange")
    ax.set_xlabel("r")
    ax.set_ylabel("field value")
    if title:
        ax.set_title(title)
    ax.legend()
    _finish(fig, path)


def plot_trace(path: Path, trace: ContinuationTrace, param_name: str) -> None:
    """Continuation diagnostics: norms, level, and f'(u)u mass per step."""
    ps = trace.parameters
    d12_u = [s.report.norms_u.d12 for s in trace.steps]
    d12_phi = [s.report.norms_phi.d12 for s in trace.steps]
    levels = [s.report.level_estimate for s in trace.steps]
    fmass = [s.fprime_mass for s in trace.steps]

    fig, axes = plt.subplots(1, 2, figsize=(9.6, 4.0))
    ax = axes[0]
    ax.plot(ps, d12_u, "o-", label="|grad u|_2")
    ax.plot(ps, d12_phi, "s-", label="|grad phi|_2")
    ax.set_xlabel(param_name)
    ax.set_ylabel("gradient seminorm")
    if min(ps) > 0 and max(ps) / max(min(ps), 1e-300) > 50:
        ax.set_xscale("log")
    ax.legend()

    ax = axes[1]
    ax.plot(ps, levels, "o-", label="level")
    ax.plot(ps, fmass, "s-", label="int f'(u) u")
    ax.set_xlabel(param_name)
    if min(ps) > 0 and max(ps) / max(min(ps), 1e-300) > 50:
        ax.set_xscale("log")
    ax.legend()
    _finish(fig, path)


_REGION_COLORS = {
    "ExistenceThm1": "tab:green",
    "ExistenceDM": "tab:olive",
    "ExistenceBF": "tab:cyan",
    "Nonexistence": "tab:red",
    "Unknown": "lightgray",
}


def plot_region_map(
    path: Path,
    rows: Sequence[dict],
    curve_ps: Sequence[float],
    curve_g: Sequence[float],
    curve_g0: Sequence[float],
) -> None:
    """Existence classification in the (p, omega/m) plane with thresholds."""
    fig, ax = plt.subplots()
    for region, color in _REGION_COLORS.items():
        xs = [row["p"] for row in rows if row["region"] == region]
        ys = [row["omega_ratio"] for row in rows if row["region"] == region]
        if xs:
            ax.scatter(xs, ys, s=8, c=color, label=region, edgecolors="none")
    ax.plot(curve_ps, curve_g, "k-", lw=1.5, label="g(p)")
    ax.plot(curve_ps, curve_g0, "k--", lw=1.2, label="g0(p)")
    ax.set_xlabel("p")
    ax.set_ylabel("omega / m")
    ax.legend(fontsize=7, loc="lower right")
    _finish(fig, path)


def plot_certificate_curve(
    path: Path, report: ThresholdReport, m: float, omega: float
) -> None:
    """K(p, alpha) over the admissible interval with the frequency line."""
    lo, hi = admissible_alpha_interval(report.p)
    alphas = np.linspace(lo, hi - 1e-9 * (hi - lo), 600, endpoint=False)
    ks = np.array([critical_ratio_sq(report.p, a) for a in alphas])
    ratio_sq = (m / omega) ** 2

    fig, ax = plt.subplots()
    mask = ks < 10 * ratio_sq
    ax.plot(alphas[mask], ks[mask], label="K(p, alpha)")
    ax.axhline(ratio_sq, color="tab:red", ls="--", label="(m/omega)^2")
    ax.axhline(report.inf_kp, color="tab:gray", ls=":", label="inf K")
    if report.alpha_star is not None:
        ax.axvline(report.alpha_star, color="tab:green", ls="--", label="alpha*")
    ax.set_xlabel("alpha")
    ax.set_ylabel("K")
    ax.set_title(f"p = {report.p}")
    ax.legend(fontsize=8)
    _finish(fig, path)

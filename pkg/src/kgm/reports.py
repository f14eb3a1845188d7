"""Serialization of grids, fields, reports, and traces to CSV and JSON.

CSV files carry floats with 17 significant digits (full double round-trip);
all writers emit rows in a fixed order so identical inputs produce
byte-identical files.
"""

from __future__ import annotations

import json
from pathlib import Path
from typing import Iterable, Optional, Sequence

import numpy as np

from .model import DoublePower, Field, ModelParams, Power, RadialGrid
from .thresholds import ThresholdReport
from .variational_solver import ContinuationTrace, SolutionReport

__all__ = [
    "fmt",
    "params_to_dict",
    "params_from_dict",
    "write_field_csv",
    "read_field_csv",
    "write_field_json",
    "write_solution_report",
    "write_profiles_csv",
    "write_trace_csv",
    "write_region_csv",
    "write_curve_files",
    "write_threshold_report",
]


def fmt(x: float) -> str:
    """Format a float with 17 significant digits."""
    return format(float(x), ".17g")


def params_to_dict(params: ModelParams) -> dict:
    nl = params.nonlinearity
    if isinstance(nl, Power):
        nl_dict = {"variant": "power", "p": nl.p}
    else:
        nl_dict = {"variant": "double_power", "p": nl.p, "q": nl.q, "alpha": nl.alpha}
    return {"m": params.m, "omega": params.omega, "e": params.e, "nonlinearity": nl_dict}


def params_from_dict(d: dict) -> ModelParams:
    nd = d["nonlinearity"]
    if nd["variant"] == "power":
        nl = Power(nd["p"])
    elif nd["variant"] == "double_power":
        nl = DoublePower(nd["p"], nd["q"], nd["alpha"])
    else:
        raise ValueError(f"unknown nonlinearity variant {nd['variant']!r}")
    return ModelParams(m=d["m"], omega=d["omega"], e=d["e"], nonlinearity=nl)


def write_field_csv(path: Path, field: Field, header: str = "r,value") -> None:
    lines = [header]
    for r, v in zip(field.grid.nodes, field.values):
        lines.append(f"{fmt(r)},{fmt(v)}")
    Path(path).write_text("\n".join(lines) + "\n")


def read_field_csv(path: Path, grid: RadialGrid) -> Field:
    rows = Path(path).read_text().strip().splitlines()[1:]
    vals = np.array([float(row.split(",")[1]) for row in rows])
    return Field(grid, vals)


def write_field_json(path: Path, field: Field, params: Optional[ModelParams] = None) -> None:
    """JSON envelope with the grid descriptor, parameters, and samples."""
    doc = {
        "n": field.grid.n,
        "r_max": field.grid.r_max,
        "params": params_to_dict(params) if params is not None else None,
        "r": [float(fmt(r)) for r in field.grid.nodes],
        "values": [float(fmt(v)) for v in field.values],
    }
    Path(path).write_text(json.dumps(doc, indent=1) + "\n")


def _norms_dict(norms) -> dict:
    return {"d12": norms.d12, "l2": norms.l2, "lp": norms.lp, "h1": norms.h1}


def report_to_dict(report: SolutionReport, params: ModelParams, mode_kind: str, mode_value: float) -> dict:
    e = report.energy
    r = report.residuals
    return {
        "params": params_to_dict(params),
        "mode": {"kind": mode_kind, "value": mode_value},
        "grid": {"n": report.u.grid.n, "r_max": report.u.grid.r_max},
        "energy": {
            "kinetic": e.kinetic,
            "mass_term": e.mass_term,
            "interaction": e.interaction,
            "potential": e.potential,
            "total": e.total,
        },
        "residuals": {
            "nehari": r.nehari,
            "pohozaev": r.pohozaev,
            "gradient_norm": r.gradient_norm,
        },
        "norms_u": _norms_dict(report.norms_u),
        "norms_phi": _norms_dict(report.norms_phi),
        "iterations": report.iterations,
        "level_estimate": report.level_estimate,
        "converged": report.converged,
    }


def write_solution_report(
    path: Path,
    report: SolutionReport,
    params: ModelParams,
    mode_kind: str,
    mode_value: float,
) -> None:
    doc = report_to_dict(report, params, mode_kind, mode_value)
    Path(path).write_text(json.dumps(doc, indent=1) + "\n")


def write_profiles_csv(path: Path, report: SolutionReport) -> None:
    lines = ["r,u,phi"]
    for r, u, phi in zip(report.u.grid.nodes, report.u.values, report.phi.values):
        lines.append(f"{fmt(r)},{fmt(u)},{fmt(phi)}")
    Path(path).write_text("\n".join(lines) + "\n")


def write_trace_csv(path: Path, trace: ContinuationTrace) -> None:
    lines = ["parameter,energy,d12_u,d12_phi,nehari,pohozaev,fprime_mass"]
    for step in trace.steps:
        rep = step.report
        lines.append(
            ",".join(
                fmt(x)
                for x in (
                    step.parameter,
                    rep.energy.total,
                    rep.norms_u.d12,
                    rep.norms_phi.d12,
                    rep.residuals.nehari,
                    rep.residuals.pohozaev,
                    step.fprime_mass,
                )
            )
        )
    Path(path).write_text("\n".join(lines) + "\n")


def write_region_csv(path: Path, rows: Iterable[dict]) -> None:
    """Sweep classification rows, row-major in (p, omega_ratio)."""
    lines = ["p,omega_ratio,region,g_p,g0_p,inf_kp,alpha_star"]
    for row in rows:
        lines.append(
            ",".join(
                [
                    fmt(row["p"]),
                    fmt(row["omega_ratio"]),
                    str(row["region"]),
                    fmt(row["g_p"]) if row["g_p"] is not None else "",
                    fmt(row["g0_p"]) if row["g0_p"] is not None else "",
                    fmt(row["inf_kp"]) if row["inf_kp"] is not None else "",
                    fmt(row["alpha_star"]) if row["alpha_star"] is not None else "",
                ]
            )
        )
    Path(path).write_text("\n".join(lines) + "\n")


def write_curve_files(
    csv_path: Path, dat_path: Path, ps: Sequence[float], gs: Sequence[float], g0s: Sequence[float]
) -> None:
    """Threshold curves: a CSV with both curves and a gnuplot-style data file.

    The .dat file is two-column (p, g(p)) with a '#'-prefixed header line.
    """
    lines = ["p,g_p,g0_p"]
    for p, gp, g0p in zip(ps, gs, g0s):
        lines.append(f"{fmt(p)},{fmt(gp)},{fmt(g0p)}")
    Path(csv_path).write_text("\n".join(lines) + "\n")

    dat = ["# p g_p"]
    for p, gp in zip(ps, gs):
        dat.append(f"{fmt(p)} {fmt(gp)}")
    Path(dat_path).write_text("\n".join(dat) + "\n")


def write_threshold_report(path: Path, report: ThresholdReport, m: float, omega: float) -> None:
    doc = {
        "p": report.p,
        "m": m,
        "omega": omega,
        "g_p": report.g_of_p,
        "g0_p": report.g0_of_p,
        "inf_kp": report.inf_kp,
        "alpha_star": report.alpha_star,
        "certificate": None
        if report.certificate is None
        else {
            "passed": report.certificate.passed,
            "min_value": report.certificate.min_value,
            "witness": report.certificate.witness,
        },
        "region": report.region.value,
    }
    Path(path).write_text(json.dumps(doc, indent=1) + "\n")

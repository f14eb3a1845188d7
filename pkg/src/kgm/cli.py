"""Command-line front end: solve, zero-mass, sweep, thresholds, selftest.

Every command reads an optional INI config file (section per command),
applies command-line overrides, validates, runs, and writes delimited
output plus JSON reports; report paths also render matplotlib figures next
to the data files unless plotting is disabled.  Exit codes: 0 success,
1 configuration or precondition error, 2 solver non-convergence or a
tripped runtime monitor.

The sweep dispatches sampled solves to a worker pool capped by the
KGM_THREADS environment variable; results are gathered in row-major order
regardless of completion order, and all randomness is governed by --seed.
"""

from __future__ import annotations

import argparse
import dataclasses
import json
import math
import os
import sys
from pathlib import Path
from typing import Optional

import numpy as np

from . import thresholds as th
from .config import (
    SelftestConfig,
    SolveConfig,
    SweepConfig,
    ThresholdsConfig,
    ZeroMassConfig,
    field_types,
    load_config_file,
    parse_range,
)
from .energy import EnergyMode
from .errors import ConfigError, KGMError
from .model import DoublePower, ModelParams, Power, make_grid
from .variational_solver import (
    SeedProfile,
    SolverOptions,
    epsilon_continuation,
    mountain_pass_solve,
    nehari_descent,
)
from . import reports as rp

__all__ = ["main"]


def _solver_options(cfg) -> SolverOptions:
    return SolverOptions(
        method=cfg.method,
        max_iters=cfg.max_iters,
        grad_tol=cfg.grad_tol,
        seed_profile=SeedProfile(amplitude=cfg.seed_amplitude, width=cfg.seed_width),
    )


def _run_solver(params, grid, opts, mode):
    if opts.method == "nehari_descent":
        return nehari_descent(params, grid, opts, mode)
    return mountain_pass_solve(params, grid, opts, mode)


# --------------------------------------------------------------------------
# solve
# --------------------------------------------------------------------------

def cmd_solve(cfg: SolveConfig) -> int:
    cfg.validate()
    region = th.classify_existence(cfg.p, cfg.omega / cfg.m)
    if region is th.Region.NONEXISTENCE:
        print(f"Nonexistence region (classifier): p={cfg.p}, omega/m={cfg.omega / cfg.m}")
        if not cfg.force:
            print("refusing to run; pass --force to attempt anyway")
            return 1
    elif region is th.Region.UNKNOWN:
        print(f"note: ({cfg.p}, {cfg.omega / cfg.m}) is outside every certified region")

    params = ModelParams(m=cfg.m, omega=cfg.omega, e=cfg.e, nonlinearity=Power(cfg.p))
    grid = make_grid(cfg.n, cfg.rmax)
    opts = _solver_options(cfg)
    mode = EnergyMode.standard(cfg.lam)
    report = _run_solver(params, grid, opts, mode)

    out = Path(cfg.out)
    out.mkdir(parents=True, exist_ok=True)
    rp.write_solution_report(out / "report.json", report, params, mode.kind, mode.value)
    rp.write_profiles_csv(out / "profiles.csv", report)
    if cfg.plots:
        from .plots import plot_profiles

        plot_profiles(
            out / "profiles.png",
            report,
            title=f"p={cfg.p}, omega/m={cfg.omega / cfg.m:g}, e={cfg.e:g}",
        )

    res = report.residuals
    ok = report.converged and res.pohozaev <= 1e-2
    print(
        f"converged={report.converged} gradient={res.gradient_norm:.3e} "
        f"nehari={res.nehari:.3e} pohozaev={res.pohozaev:.3e} "
        f"level={report.level_estimate:.8g} -> {out}"
    )
    return 0 if ok else 2


# --------------------------------------------------------------------------
# zero-mass
# --------------------------------------------------------------------------

def cmd_zero_mass(cfg: ZeroMassConfig) -> int:
    cfg.validate()
    params = ModelParams(
        m=cfg.m,
        omega=cfg.m,
        e=cfg.e,
        nonlinearity=DoublePower(cfg.p, cfg.q, cfg.alpha),
    )
    grid = make_grid(cfg.n, cfg.rmax)
    opts = _solver_options(cfg)
    schedule = [cfg.eps0 * 2.0**-k for k in range(cfg.steps + 1)]

    try:
        trace = epsilon_continuation(params, grid, opts, eps_schedule=schedule)
    except KGMError as ex:
        print(f"continuation aborted: {type(ex).__name__}: {ex}")
        return 2

    out = Path(cfg.out)
    out.mkdir(parents=True, exist_ok=True)
    rp.write_trace_csv(out / "trace.csv", trace)
    final = trace.final
    rp.write_solution_report(out / "final.json", final, params, "zero_mass", 0.0)
    rp.write_profiles_csv(out / "final_profiles.csv", final)
    if cfg.plots:
        from .plots import plot_profiles, plot_trace

        plot_trace(out / "trace.png", trace, param_name="eps")
        plot_profiles(out / "final_profiles.png", final, title="zero-mass limit")

    res = final.residuals
    ok = final.converged and res.gradient_norm <= 10.0 * cfg.grad_tol
    print(
        f"steps={len(trace.steps)} final: converged={final.converged} "
        f"gradient={res.gradient_norm:.3e} level={final.level_estimate:.8g} -> {out}"
    )
    return 0 if ok else 2


# --------------------------------------------------------------------------
# sweep
# --------------------------------------------------------------------------

def _sweep_solve_cell(task: tuple) -> dict:
    """Worker for sampled sweep solves (top-level for pickling)."""
    p, ratio, n, rmax, grad_tol, max_iters = task
    params = ModelParams(m=1.0, omega=ratio, e=1.0, nonlinearity=Power(p))
    grid = make_grid(n, rmax)
    opts = SolverOptions(method="nehari_descent", grad_tol=grad_tol, max_iters=max_iters)
    report = nehari_descent(params, grid, opts, EnergyMode.standard(1.0))
    return {
        "p": p,
        "omega_ratio": ratio,
        "converged": report.converged,
        "gradient_norm": report.residuals.gradient_norm,
        "level": report.level_estimate,
    }


def cmd_sweep(cfg: SweepConfig) -> int:
    cfg.validate()
    ps = parse_range(cfg.p_range)
    ratios = parse_range(cfg.ratio_range)

    inf_kp_cache: dict = {}

    def inf_kp_for(p: float) -> Optional[float]:
        if not 2.0 < p < 4.0:
            return None
        if p not in inf_kp_cache:
            if p <= 3.0:
                inf_kp_cache[p] = th.min_critical_ratio_sq(p)
            else:
                inf_kp_cache[p] = th._numeric_inf_kp(p, points=20001)
        return inf_kp_cache[p]

    rows = []
    for p in ps:  # row-major: p outer, ratio inner
        for ratio in ratios:
            region = th.classify_existence(p, ratio)
            g_p = th.threshold_curve(p) if 2.0 < p < 4.0 else None
            g0_p = th.threshold_curve_legacy(p) if 2.0 < p <= 4.0 else None
            alpha_star = None
            if region is th.Region.EXISTENCE_THM1:
                alpha_star = th.find_alpha(p, 1.0, ratio)
            rows.append(
                {
                    "p": p,
                    "omega_ratio": ratio,
                    "region": region.value,
                    "g_p": g_p,
                    "g0_p": g0_p,
                    "inf_kp": inf_kp_for(p),
                    "alpha_star": alpha_star,
                }
            )

    out = Path(cfg.out)
    out.mkdir(parents=True, exist_ok=True)
    rp.write_region_csv(out / "regions.csv", rows)

    curve_ps = [2.0 + k * 0.002 for k in range(1, 1000)] + [4.0]
    curve_g = [th.threshold_curve(p) if p < 4.0 else float("nan") for p in curve_ps]
    curve_g0 = [th.threshold_curve_legacy(p) for p in curve_ps]
    rp.write_curve_files(out / "curves.csv", out / "g_curve.dat", curve_ps, curve_g, curve_g0)

    sample_results = []
    if cfg.solve_sample > 0:
        cells = [r for r in rows if r["region"] == th.Region.EXISTENCE_THM1.value]
        rng = np.random.default_rng(cfg.seed)
        idx = sorted(rng.choice(len(cells), size=min(cfg.solve_sample, len(cells)), replace=False))
        tasks = [
            (cells[i]["p"], cells[i]["omega_ratio"], cfg.n, cfg.rmax, cfg.grad_tol, cfg.max_iters)
            for i in idx
        ]
        threads = int(os.environ.get("KGM_THREADS", "1"))
        if threads > 1 and len(tasks) > 1:
            import multiprocessing as mp

            with mp.Pool(min(threads, len(tasks))) as pool:
                sample_results = pool.map(_sweep_solve_cell, tasks)
        else:
            sample_results = [_sweep_solve_cell(t) for t in tasks]
        lines = ["p,omega_ratio,converged,gradient_norm,level"]
        for r in sample_results:
            lines.append(
                f"{rp.fmt(r['p'])},{rp.fmt(r['omega_ratio'])},{r['converged']},"
                f"{rp.fmt(r['gradient_norm'])},{rp.fmt(r['level'])}"
            )
        (out / "solves.csv").write_text("\n".join(lines) + "\n")

    if cfg.plots:
        from .plots import plot_region_map

        finite = [(p, g) for p, g in zip(curve_ps, curve_g) if math.isfinite(g)]
        plot_region_map(
            out / "region_map.png",
            rows,
            [p for p, _ in finite],
            [g for _, g in finite],
            [th.threshold_curve_legacy(p) for p, _ in finite],
        )

    n_fail = sum(1 for r in sample_results if not r["converged"])
    print(
        f"{len(rows)} cells -> {out} "
        f"(sampled solves: {len(sample_results)}, failed: {n_fail})"
    )
    return 0 if n_fail == 0 else 2


# --------------------------------------------------------------------------
# thresholds
# --------------------------------------------------------------------------

def cmd_thresholds(cfg: ThresholdsConfig) -> int:
    cfg.validate()
    report = th.threshold_report(cfg.p, cfg.m, cfg.omega)
    lo, hi = th.admissible_alpha_interval(cfg.p)
    print(f"p = {report.p}")
    print(f"g(p)  = {report.g_of_p:.12g}")
    print(f"g0(p) = {report.g0_of_p:.12g}")
    print(f"admissible alpha interval = ({lo:.12g}, {hi:.12g})")
    print(f"inf K_p = {report.inf_kp:.12g}")
    if report.alpha_star is not None:
        print(f"alpha* = {report.alpha_star:.12g}")
        print(f"certificate: {'pass' if report.certificate.passed else 'FAIL'}")
    else:
        print("alpha* = none (omega outside the certified window)")
    print(f"region = {report.region.value}")

    out = Path(cfg.out)
    out.mkdir(parents=True, exist_ok=True)
    rp.write_threshold_report(out / "thresholds.json", report, cfg.m, cfg.omega)
    if cfg.plots:
        from .plots import plot_certificate_curve

        plot_certificate_curve(out / "certificate.png", report, cfg.m, cfg.omega)
    return 0


# --------------------------------------------------------------------------
# selftest
# --------------------------------------------------------------------------

def _selftest_checks(cfg: SelftestConfig):
    """Yield (name, callable) pairs; callables return (ok, detail)."""
    from . import selftest as st

    yield from st.build_checks(quick=cfg.quick, sabotage=cfg.sabotage, seed=cfg.seed)


def cmd_selftest(cfg: SelftestConfig) -> int:
    cfg.validate()
    failures = []
    for name, check in _selftest_checks(cfg):
        try:
            ok, detail = check()
        except Exception as ex:  # a crashed check is a failed check
            ok, detail = False, f"{type(ex).__name__}: {ex}"
        verdict = "ok  " if ok else "FAIL"
        print(f"[{verdict}] {name}: {detail}")
        if not ok:
            failures.append(name)
    if failures:
        print(f"{len(failures)} invariant(s) failed: {', '.join(failures)}")
        return 2
    print("all invariants passed")
    return 0


# --------------------------------------------------------------------------
# argument parsing
# --------------------------------------------------------------------------

def _add_overridable(parser: argparse.ArgumentParser, cls) -> None:
    """One optional flag per config field; None means 'not provided'."""
    types = field_types(cls)
    for f in dataclasses.fields(cls):
        name = "--" + f.name.replace("_", "-")
        if types[f.name] is bool:
            parser.add_argument(name, dest=f.name, action="store_true", default=None)
            parser.add_argument(
                "--no-" + f.name.replace("_", "-"),
                dest=f.name,
                action="store_false",
                default=None,
            )
        else:
            parser.add_argument(name, dest=f.name, default=None)


def _merge(cls, file_cfg, args: argparse.Namespace):
    """File values override defaults; CLI flags override file values."""
    from .config import _coerce

    base = file_cfg if file_cfg is not None else cls()
    types = field_types(cls)
    values = {}
    for f in dataclasses.fields(cls):
        raw = getattr(args, f.name, None)
        if raw is None:
            values[f.name] = getattr(base, f.name)
        elif isinstance(raw, bool):
            values[f.name] = raw
        else:
            try:
                values[f.name] = _coerce(types[f.name], str(raw))
            except ValueError as ex:
                raise ConfigError(f"{f.name}: {ex}") from ex
    return cls(**values)


_COMMANDS = {
    "solve": (SolveConfig, cmd_solve),
    "zero-mass": (ZeroMassConfig, cmd_zero_mass),
    "sweep": (SweepConfig, cmd_sweep),
    "thresholds": (ThresholdsConfig, cmd_thresholds),
    "selftest": (SelftestConfig, cmd_selftest),
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="kgm",
        description="Standing-wave solver for nonlinear Klein-Gordon-Maxwell systems",
    )
    parser.add_argument("--config", default=None, help="INI config file (section per command)")
    sub = parser.add_subparsers(dest="command")
    for name, (cls, _) in _COMMANDS.items():
        p = sub.add_parser(name)
        _add_overridable(p, cls)
    return parser


def main(argv: Optional[list] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.command is None:
        parser.print_help()
        return 1
    cls, runner = _COMMANDS[args.command]
    try:
        file_cfgs = load_config_file(Path(args.config)) if args.config else {}
        cfg = _merge(cls, file_cfgs.get(args.command), args)
        return runner(cfg)
    except ConfigError as ex:
        print(f"config error: {ex}", file=sys.stderr)
        return 1
    except KGMError as ex:
        print(f"{type(ex).__name__}: {ex}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())

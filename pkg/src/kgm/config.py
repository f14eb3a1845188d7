"""Run configuration: per-command parameter sets with INI round-trip.

Configs live in a flat key-value file with one section per command
([solve], [zero-mass], [sweep], [thresholds], [selftest]); command-line
flags override file values.  Parsing and serialization round-trip exactly
(floats via repr), and every physical or grid precondition is validated
before dispatch with the offending field named in the error.
"""

from __future__ import annotations

import configparser
import io
from dataclasses import dataclass, fields
from pathlib import Path
from typing import Optional, Union, get_args, get_origin, get_type_hints

from .errors import ConfigError

__all__ = [
    "SolveConfig",
    "ZeroMassConfig",
    "SweepConfig",
    "ThresholdsConfig",
    "SelftestConfig",
    "parse_ini",
    "serialize_ini",
    "parse_range",
    "SECTION_TYPES",
]


@dataclass
class SolveConfig:
    """Parameters of a single standard-mode critical-point solve."""

    p: Optional[float] = None
    omega: Optional[float] = None
    m: float = 1.0
    e: float = 1.0
    lam: float = 1.0
    n: int = 4000
    rmax: float = 50.0
    method: str = "mountain_pass"
    grad_tol: float = 1e-6
    max_iters: int = 40000
    seed_amplitude: float = 2.0
    seed_width: float = 2.0
    out: str = "kgm-solve"
    force: bool = False
    plots: bool = True
    seed: int = 42

    def validate(self):
        if self.p is None:
            raise ConfigError("p: exponent is required")
        if not 2.0 < self.p < 10.0:
            raise ConfigError(f"p: {self.p} outside the representable range (2, 10)")
        if self.omega is None:
            raise ConfigError("omega: frequency is required")
        if not self.omega > 0.0:
            raise ConfigError(f"omega: {self.omega} must be positive")
        if not self.m > 0.0:
            raise ConfigError(f"m: {self.m} must be positive")
        if self.omega > self.m:
            raise ConfigError(f"omega: {self.omega} exceeds m={self.m}")
        if self.e < 0.0:
            raise ConfigError(f"e: {self.e} must be nonnegative")
        if not 0.0 < self.lam <= 1.0:
            raise ConfigError(f"lam: {self.lam} outside (0, 1]")
        if self.n < 16:
            raise ConfigError(f"n: {self.n} is below the minimum 16")
        if not self.rmax > 0.0:
            raise ConfigError(f"rmax: {self.rmax} must be positive")
        if self.method not in ("mountain_pass", "nehari_descent"):
            raise ConfigError(f"method: unknown {self.method!r}")


@dataclass
class ZeroMassConfig:
    """Parameters of the omega = m continuation run."""

    p: float = 5.0
    q: float = 7.0
    alpha: float = 5.0
    m: float = 1.0
    e: float = 1.0
    eps0: float = 1.0
    steps: int = 12
    n: int = 2000
    rmax: float = 40.0
    method: str = "nehari_descent"
    grad_tol: float = 1e-6
    max_iters: int = 40000
    seed_amplitude: float = 2.0
    seed_width: float = 2.0
    out: str = "kgm-zero-mass"
    plots: bool = True
    seed: int = 42

    def validate(self):
        if not self.q > 6.0:
            raise ConfigError(
                f"q: {self.q} must exceed 6 (supercritical near zero requires p < 6 < q)"
            )
        if not 4.0 < self.alpha <= self.p < 6.0:
            raise ConfigError(
                f"alpha/p: need 4 < alpha <= p < 6, got alpha={self.alpha}, p={self.p}"
            )
        if not self.m > 0.0:
            raise ConfigError(f"m: {self.m} must be positive")
        if self.e < 0.0:
            raise ConfigError(f"e: {self.e} must be nonnegative")
        if not self.eps0 > 0.0:
            raise ConfigError(f"eps0: {self.eps0} must be positive")
        if self.steps < 0:
            raise ConfigError(f"steps: {self.steps} must be nonnegative")
        if self.n < 16:
            raise ConfigError(f"n: {self.n} is below the minimum 16")
        if not self.rmax > 0.0:
            raise ConfigError(f"rmax: {self.rmax} must be positive")
        if self.method not in ("mountain_pass", "nehari_descent"):
            raise ConfigError(f"method: unknown {self.method!r}")


@dataclass
class SweepConfig:
    """Existence-map sweep over a (p, omega/m) grid."""

    p_range: str = "2.05:3.95:0.05"
    ratio_range: str = "0.05:1.0:0.05"
    solve_sample: int = 0
    n: int = 1000
    rmax: float = 30.0
    grad_tol: float = 1e-6
    max_iters: int = 40000
    out: str = "kgm-sweep"
    plots: bool = True
    seed: int = 42

    def validate(self):
        for name, rng in (("p_range", self.p_range), ("ratio_range", self.ratio_range)):
            try:
                parse_range(rng)
            except ValueError as ex:
                raise ConfigError(f"{name}: {ex}") from ex
        if self.solve_sample < 0:
            raise ConfigError(f"solve_sample: {self.solve_sample} must be nonnegative")
        if self.n < 16:
            raise ConfigError(f"n: {self.n} is below the minimum 16")


@dataclass
class ThresholdsConfig:
    """Threshold-algebra report at a single parameter point."""

    p: Optional[float] = None
    m: float = 1.0
    omega: Optional[float] = None
    out: str = "kgm-thresholds"
    plots: bool = True

    def validate(self):
        if self.p is None:
            raise ConfigError("p: exponent is required")
        if not 2.0 < self.p < 4.0:
            raise ConfigError(f"p: {self.p} outside the open range (2, 4)")
        if self.omega is None:
            raise ConfigError("omega: frequency is required")
        if not self.omega > 0.0:
            raise ConfigError(f"omega: {self.omega} must be positive")
        if not self.m > 0.0:
            raise ConfigError(f"m: {self.m} must be positive")


@dataclass
class SelftestConfig:
    """Invariant self-test run."""

    quick: bool = False
    sabotage: str = ""
    seed: int = 42

    def validate(self):
        if self.sabotage not in ("", "ab-identity"):
            raise ConfigError(f"sabotage: unknown mode {self.sabotage!r}")


SECTION_TYPES = {
    "solve": SolveConfig,
    "zero-mass": ZeroMassConfig,
    "sweep": SweepConfig,
    "thresholds": ThresholdsConfig,
    "selftest": SelftestConfig,
}


def field_types(cls) -> dict:
    """Resolved {field name: type} for a config dataclass."""
    return get_type_hints(cls)


def parse_range(expr: str) -> list[float]:
    """Inclusive start:stop:step range, e.g. '2.05:3.95:0.05'."""
    parts = expr.split(":")
    if len(parts) != 3:
        raise ValueError(f"range {expr!r} is not start:stop:step")
    start, stop, step = (float(x) for x in parts)
    if step <= 0.0 or stop < start:
        raise ValueError(f"range {expr!r} must have positive step and stop >= start")
    count = int((stop - start) / step + 1e-9) + 1
    return [start + k * step for k in range(count)]


def _coerce(ftype, raw: str):
    origin = get_origin(ftype)
    if origin is Union:  # Optional[...]
        inner = [a for a in get_args(ftype) if a is not type(None)][0]
        if raw == "none":
            return None
        return _coerce(inner, raw)
    if ftype is bool:
        if raw.lower() in ("true", "1", "yes"):
            return True
        if raw.lower() in ("false", "0", "no"):
            return False
        raise ValueError(f"not a boolean: {raw!r}")
    if ftype is int:
        return int(raw)
    if ftype is float:
        return float(raw)
    return raw


def parse_ini(text: str) -> dict:
    """Parse an INI document into {section: config dataclass}."""
    cp = configparser.ConfigParser()
    cp.read_string(text)
    out = {}
    for section in cp.sections():
        if section not in SECTION_TYPES:
            raise ConfigError(f"section: unknown [{section}]")
        cls = SECTION_TYPES[section]
        kwargs = {}
        types = field_types(cls)
        for key, raw in cp.items(section):
            if key not in types:
                raise ConfigError(f"{key}: unknown key in [{section}]")
            try:
                kwargs[key] = _coerce(types[key], raw)
            except ValueError as ex:
                raise ConfigError(f"{key}: {ex}") from ex
        out[section] = cls(**kwargs)
    return out


def _to_raw(value) -> str:
    if value is None:
        return "none"
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return repr(value)
    return str(value)


def serialize_ini(configs: dict) -> str:
    """Serialize {section: config dataclass} so parse_ini round-trips."""
    cp = configparser.ConfigParser()
    for section, cfg in configs.items():
        cp[section] = {f.name: _to_raw(getattr(cfg, f.name)) for f in fields(cfg)}
    buf = io.StringIO()
    cp.write(buf)
    return buf.getvalue()


def load_config_file(path: Path) -> dict:
    return parse_ini(Path(path).read_text())

"""Solver configuration shared by the numerical modules and the CLI.

A :class:`SolverConfig` collects every tolerance, grid parameter and branch
choice in one (immutable) place so that identical configs give identical,
reproducible runs.  The CLI builds one from defaults < config file < flags.
"""

from __future__ import annotations

import dataclasses
import math
from dataclasses import dataclass

from .errors import ConfigurationError


@dataclass(frozen=True)
class SolverConfig:
    # Newton / fixed-point tolerances
    newton_tol: float = 1e-12
    newton_max_iter: int = 100
    # quadrature
    quad_tol: float = 1e-10
    # ODE integration
    ode_rel_tol: float = 1e-10
    ode_abs_tol: float = 1e-12
    ode_method: str = "DOP853"
    # Laplace-plane grid
    p_max: float = 10.0
    grid_size: int = 64          # number of intervals M; M+1 nodes
    contraction_alpha: float = 1.0   # weight of the sup norm e^{-alpha p}
    picard_max_iter: int = 60
    # inner-region grid
    eta_max: float = 50.0
    eta_min: float = 2.0
    ray_angle: float = 0.0
    eta_nodes: int = 600
    farfield_terms: int = 3
    blowup_threshold: float = 1e6
    # branch choices
    sqrt_branch: int = 1             # +1 follows the leading-order balance
    n_orientation: str = "lower"     # singularity ladder toward -4pi/9 wedge
    # singularity wedge acceptance about arg eta = -4pi/9
    wedge_center: float = -4.0 * math.pi / 9.0
    wedge_half_width: float = math.pi / 9.0 - 0.05
    # Stokes constant (None means "must be fitted or supplied")
    stokes_constant: complex | None = None
    # output
    output_format: str = "json"

    def __post_init__(self):
        for name in ("newton_tol", "quad_tol", "ode_rel_tol", "ode_abs_tol"):
            if getattr(self, name) <= 0:
                raise ConfigurationError(f"{name} must be positive")
        if self.grid_size < 16:
            raise ConfigurationError("grid_size must be at least 16")
        if not (self.eta_max > self.eta_min > 0):
            raise ConfigurationError("need eta_max > eta_min > 0")
        if self.n_orientation not in ("lower", "upper"):
            raise ConfigurationError("n_orientation must be 'lower' or 'upper'")
        if self.output_format not in ("json", "csv"):
            raise ConfigurationError("output_format must be 'json' or 'csv'")

    def replace(self, **kw) -> "SolverConfig":
        return dataclasses.replace(self, **kw)


_FIELD_TYPES = {f.name: f.type for f in dataclasses.fields(SolverConfig)}


def _coerce(name: str, raw: str):
    typ = _FIELD_TYPES[name]
    if typ in ("int",):
        return int(raw)
    if typ in ("float",):
        return float(raw)
    if typ == "complex | None":
        return complex(raw)
    return raw


def parse_config_file(path) -> dict:
    """Read a flat ``key = value`` file (# comments, blank lines allowed)."""
    out = {}
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, 1):
            line = line.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise ConfigurationError(f"{path}:{lineno}: expected key = value")
            key, _, raw = line.partition("=")
            key = key.strip()
            if key not in _FIELD_TYPES:
                raise ConfigurationError(f"{path}:{lineno}: unknown key {key!r}")
            out[key] = _coerce(key, raw.strip())
    return out


def build_config(file_values: dict | None = None, **flag_values) -> SolverConfig:
    """Merge defaults, config-file values, and flag overrides (in that order)."""
    merged = dict(file_values or {})
    merged.update({k: v for k, v in flag_values.items() if v is not None})
    unknown = set(merged) - set(_FIELD_TYPES)
    if unknown:
        raise ConfigurationError(f"unknown config keys: {sorted(unknown)}")
    return SolverConfig(**merged)

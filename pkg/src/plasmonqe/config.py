"""Run configuration: key = value files, overrides and the resolved echo.

The configuration mirrors the preconditions of the numerical pipeline, so
violations surface at parse time with the offending key (and line number for
file input).  A resolved echo written next to the outputs reparses to the
identical configuration.
"""

from __future__ import annotations

from dataclasses import dataclass, fields, replace

from .materials import Dielectric, DrudeMetal, Emitter, MaterialSystem
from .quadrature import QuadConfig

CONVENTIONS = ("as-printed", "kernel-matched")


class ConfigError(ValueError):
    """Malformed or invalid configuration input."""


@dataclass(frozen=True)
class RunConfig:
    # material system
    omega_p_ev: float = 9.0
    eps_inf: float = 5.7
    gamma_p_ev: float = 0.1
    eps_d: float = 25.0
    omega0_ev: float = 1.2
    gamma0_ev: float = 1e-4
    delta_z_nm: float = 1.2
    # spectral tabulation
    omega_min_ev: float = 0.02
    omega_max_ev: float = 6.0
    base_points: int = 600
    include_free_term: bool = True
    # dynamics
    t_max_inv_ev: float = 2000.0
    dt_inv_ev: float = 0.005
    # quadrature
    quad_rel_tol: float = 1e-9
    quad_abs_tol: float = 1e-12
    quad_max_subdivisions: int = 2000
    # pseudomode normalization
    convention: str = "kernel-matched"
    # distance optimizer of the permittivity sweep
    sweep_bracket_low_nm: float = 0.5
    sweep_bracket_high_nm: float = 5.0
    sweep_coarse_points: int = 12
    sweep_tol_nm: float = 1e-3
    # output directory (CLI --out overrides)
    out_dir: str = "out"

    def validate(self) -> "RunConfig":
        def bad(key, why):
            raise ConfigError(f"invalid value for {key}: {why}")

        if self.omega_p_ev <= 0:
            bad("omega_p_ev", "must be > 0")
        if self.eps_inf < 1:
            bad("eps_inf", "must be >= 1")
        if self.gamma_p_ev < 0:
            bad("gamma_p_ev", "must be >= 0")
        if self.eps_d < 1:
            bad("eps_d", "must be >= 1")
        if self.omega0_ev <= 0:
            bad("omega0_ev", "must be > 0")
        if self.gamma0_ev <= 0:
            bad("gamma0_ev", "must be > 0")
        if self.delta_z_nm <= 0:
            bad("delta_z_nm", "must be > 0")
        if not 0 < self.omega_min_ev < self.omega_max_ev:
            bad("omega_min_ev/omega_max_ev", "need 0 < omega_min < omega_max")
        if self.base_points < 2:
            bad("base_points", "must be >= 2")
        if self.dt_inv_ev <= 0:
            bad("dt_inv_ev", "must be > 0")
        if self.t_max_inv_ev < self.dt_inv_ev:
            bad("t_max_inv_ev", "must be >= dt_inv_ev")
        if self.quad_rel_tol <= 0 or self.quad_abs_tol <= 0:
            bad("quad_rel_tol/quad_abs_tol", "must be > 0")
        if self.quad_max_subdivisions < 1:
            bad("quad_max_subdivisions", "must be >= 1")
        if self.convention not in CONVENTIONS:
            bad("convention", f"must be one of {CONVENTIONS}")
        if not 0 < self.sweep_bracket_low_nm < self.sweep_bracket_high_nm:
            bad("sweep_bracket_low_nm/sweep_bracket_high_nm", "bracket must be ordered and positive")
        if self.sweep_coarse_points < 3:
            bad("sweep_coarse_points", "must be >= 3")
        if self.sweep_tol_nm <= 0:
            bad("sweep_tol_nm", "must be > 0")
        return self

    def material_system(self) -> MaterialSystem:
        return MaterialSystem(
            metal=DrudeMetal(self.omega_p_ev, self.eps_inf, self.gamma_p_ev),
            dielectric=Dielectric(self.eps_d),
            emitter=Emitter(self.omega0_ev, self.gamma0_ev, self.delta_z_nm),
        )

    def quad_config(self) -> QuadConfig:
        return QuadConfig(
            rel_tol=self.quad_rel_tol,
            abs_tol=self.quad_abs_tol,
            max_subdivisions=self.quad_max_subdivisions,
        )


@dataclass(frozen=True)
class SweepSpec:
    """One swept parameter with its values and the distance-optimizer knobs."""

    parameter: str  # "delta_z" or "eps_d"
    values: tuple[float, ...]
    bracket_low: float = 0.5
    bracket_high: float = 5.0
    coarse_points: int = 12
    tol: float = 1e-3

    def __post_init__(self):
        if self.parameter not in ("delta_z", "eps_d"):
            raise ConfigError(f"unknown sweep parameter {self.parameter!r}")
        if not self.values:
            raise ConfigError("sweep values must be nonempty")
        if not self.bracket_low < self.bracket_high:
            raise ConfigError("sweep bracket must be ordered")


_FIELD_TYPES = {f.name: f.type for f in fields(RunConfig)}


def _parse_value(key: str, raw: str, line_no: int | None):
    kind = _FIELD_TYPES[key]
    where = f" on line {line_no}" if line_no is not None else ""
    if kind == "bool":
        low = raw.lower()
        if low in ("true", "1", "yes", "on"):
            return True
        if low in ("false", "0", "no", "off"):
            return False
        raise ConfigError(f"expected a boolean for {key}{where}, got {raw!r}")
    if kind == "int":
        try:
            return int(raw)
        except ValueError:
            raise ConfigError(f"expected an integer for {key}{where}, got {raw!r}") from None
    if kind == "float":
        try:
            return float(raw)
        except ValueError:
            raise ConfigError(f"expected a number for {key}{where}, got {raw!r}") from None
    return raw  # str


def parse_config(text: str) -> RunConfig:
    """Parse ``key = value`` lines with ``#`` comments into a RunConfig.

    Unknown keys, type mismatches and invariant violations raise ConfigError
    with the offending line number.
    """
    values: dict = {}
    for line_no, line in enumerate(text.splitlines(), start=1):
        stripped = line.split("#", 1)[0].strip()
        if not stripped:
            continue
        if "=" not in stripped:
            raise ConfigError(f"expected 'key = value' on line {line_no}: {line.rstrip()!r}")
        key, _, raw = stripped.partition("=")
        key = key.strip()
        raw = raw.strip()
        if key not in _FIELD_TYPES:
            raise ConfigError(f"unknown key {key!r} on line {line_no}")
        if not raw:
            raise ConfigError(f"missing value for {key!r} on line {line_no}")
        values[key] = _parse_value(key, raw, line_no)
    try:
        return RunConfig(**values).validate()
    except ConfigError:
        raise
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc


def apply_overrides(cfg: RunConfig, pairs) -> RunConfig:
    """Apply repeatable ``key=value`` command-line overrides."""
    updates: dict = {}
    for pair in pairs:
        if "=" not in pair:
            raise ConfigError(f"override must look like key=value, got {pair!r}")
        key, _, raw = pair.partition("=")
        key = key.strip()
        if key not in _FIELD_TYPES:
            raise ConfigError(f"unknown override key {key!r}")
        updates[key] = _parse_value(key, raw.strip(), None)
    return replace(cfg, **updates).validate()


def render_config(cfg: RunConfig) -> str:
    """Deterministic echo of the resolved configuration; reparses identically."""
    lines = ["# resolved configuration"]
    for f in fields(cfg):
        value = getattr(cfg, f.name)
        if isinstance(value, bool):
            text = "true" if value else "false"
        elif isinstance(value, float):
            text = repr(value)
        else:
            text = str(value)
        lines.append(f"{f.name} = {text}")
    return "\n".join(lines) + "\n"

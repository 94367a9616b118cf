"""Discrete emitter-field eigenstate below the continuum edge.

The Laplace-transform pole condition y(v) = v with

    y(v) = omega0 - Int_0^inf J(w)/(w - v) dw

has exactly one root v_b < 0 when y(0) < 0; that root is the bound-state
energy, and its residue weight Z = [1 + Int J(w)/(v_b - w)^2 dw]^{-1} sets
the trapped steady-state population Z^2.  All integrals are segment-exact
over the interpolated table, including the w^3 extension below the first
node (which keeps them finite down to w = 0).
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .materials import MaterialSystem
from .quadrature import DEFAULT_CONFIG, QuadConfig
from .spectral import SpectralTable, tabulate_spectral_density

_ROOT_TOL_EV = 1e-9
_THRESHOLD_TOL_EV = 1e-6
_MAX_BRACKET_EXPANSIONS = 1000


class BracketError(RuntimeError):
    """A root bracket could not be established."""


@dataclass(frozen=True)
class BoundStateResult:
    exists: bool
    varpi_b: float | None      # bound-state energy, eV (present iff exists)
    z_weight: float | None     # residue weight in (0, 1]
    y_at_zero: float           # diagnostic: existence criterion is y(0) < 0

    def __post_init__(self):
        if self.exists != (self.y_at_zero < 0):
            raise ValueError("exists flag must equal y(0) < 0")
        if self.exists:
            if self.varpi_b is None or self.varpi_b >= 0:
                raise ValueError("bound-state energy must be negative")
            if self.z_weight is None or not 0 < self.z_weight <= 1:
                raise ValueError("z_weight must lie in (0, 1]")


@dataclass(frozen=True)
class SpectrumRow:
    delta_z: float
    bound_energy: float | None


@dataclass(frozen=True)
class SpectrumMap:
    """Bound-state energy versus emitter distance; the band edge sits at 0."""

    rows: tuple[SpectrumRow, ...]
    band_edge: float = 0.0


def _extension_integrals(table: SpectralTable, varpi: float):
    """Closed-form Int_0^{w_min} of the w^3 extension against 1/(w-v), 1/(w-v)^2."""
    w_min = table.omega_min
    if w_min <= 0:
        return 0.0, 0.0
    c3 = table.j_values[0] / w_min**3
    if varpi == 0.0:
        return c3 * w_min**3 / 3.0, c3 * w_min**2 / 2.0
    v = varpi
    log_term = np.log((w_min - v) / (-v))
    s1 = w_min**3 / 3.0 + v * w_min**2 / 2.0 + v**2 * w_min + v**3 * log_term
    s2 = (
        w_min**2 / 2.0 + 2.0 * v * w_min + 3.0 * v**2 * log_term
        - v**3 / (w_min - v) - v**2
    )
    return c3 * s1, c3 * s2


def _resolvent_integrals(table: SpectralTable, varpi: float):
    """Segment-exact (Int J/(w-v) dw, Int J/(w-v)^2 dw) including the extension.

    The per-segment antiderivatives are arranged so that steep slopes never
    multiply large cancelling terms (log1p keeps full precision even for
    near-delta lines with slopes of order 1e9).
    """
    if varpi > 0:
        raise ValueError(f"varpi must be <= 0 (continuum starts at 0), got {varpi}")
    if varpi >= table.omega_min:
        raise ValueError("varpi must lie below the tabulated support")
    w = table.omega_grid
    j = table.j_values
    w1 = w[:-1]
    j1 = j[:-1]
    h = np.diff(w)
    slope = np.diff(j) / h
    d1 = w1 - varpi
    d2 = d1 + h
    logs = np.log1p(h / d1)
    # Int (j1 + m u)/(u + d1) du over u in [0, h], split into slope and value parts
    s1 = float(np.sum(slope * (h - d1 * logs) + j1 * logs))
    s2 = float(np.sum(slope * (logs - h / d2) + j1 * h / (d1 * d2)))
    e1, e2 = _extension_integrals(table, varpi)
    return s1 + e1, s2 + e2


def self_energy(table: SpectralTable, varpi: float) -> float:
    """Int_0^inf J(w)/(w - varpi) dw for varpi <= 0 (segment-exact)."""
    s1, _ = _resolvent_integrals(table, varpi)
    return s1


def self_energy_derivative(table: SpectralTable, varpi: float) -> float:
    """Int_0^inf J(w)/(w - varpi)^2 dw = d/dv self_energy."""
    _, s2 = _resolvent_integrals(table, varpi)
    return s2


def y_function(table: SpectralTable, omega0: float, varpi: float) -> float:
    """Pole function y(v) = omega0 - self_energy(v).

    y(v) - v is strictly decreasing on v <= 0, which guarantees a unique
    discrete root whenever y(0) < 0.
    """
    return omega0 - self_energy(table, varpi)


def find_bound_state(table: SpectralTable, omega0: float) -> BoundStateResult:
    """Locate the discrete root of y(v) = v below the band edge.

    Returns exists = False when y(0) >= 0.  Otherwise brackets the root by
    stepping the left edge down until y - v > 0 and bisects to
    |y(v_b) - v_b| < 1e-9 eV; the residue weight follows from the
    segment-exact derivative integral.
    """
    y0 = y_function(table, omega0, 0.0)
    if y0 >= 0:
        return BoundStateResult(False, None, None, y0)

    def f(v):
        return y_function(table, omega0, v) - v

    left = -max(1.0, abs(omega0))
    for _ in range(_MAX_BRACKET_EXPANSIONS):
        if f(left) > 0:
            break
        left *= 2.0
    else:
        raise BracketError(
            f"no left bracket for the bound state down to varpi = {left:g}"
        )
    lo, hi = left, 0.0
    f_mid = f(lo)
    for _ in range(300):
        mid = 0.5 * (lo + hi)
        f_mid = f(mid)
        if abs(f_mid) < _ROOT_TOL_EV:
            break
        if f_mid > 0:
            lo = mid
        else:
            hi = mid
    else:
        raise BracketError("bound-state bisection failed to reach tolerance")
    varpi_b = 0.5 * (lo + hi)
    z = 1.0 / (1.0 + self_energy_derivative(table, varpi_b))
    return BoundStateResult(True, varpi_b, z, y0)


def steady_population(result: BoundStateResult) -> float:
    """Trapped population Z^2, or 0 when no bound state exists."""
    if not result.exists:
        return 0.0
    return result.z_weight**2


@dataclass(frozen=True)
class TabulationParams:
    """How to rebuild spectral tables in distance scans."""

    omega_min: float = 0.02
    omega_max: float = 6.0
    base_points: int = 600
    quad: QuadConfig = field(default_factory=QuadConfig)
    include_free_term: bool = True

    def build(self, system: MaterialSystem, jobs: int = 1) -> SpectralTable:
        return tabulate_spectral_density(
            system,
            omega_min=self.omega_min,
            omega_max=self.omega_max,
            base_points=self.base_points,
            which="exact",
            cfg=self.quad,
            include_free_term=self.include_free_term,
            jobs=jobs,
        )


def _y_at_zero_for_distance(
    system: MaterialSystem, delta_z: float, params: TabulationParams
) -> float:
    table = params.build(system.with_delta_z(delta_z))
    return y_function(table, system.emitter.omega0, 0.0)


def existence_threshold(
    system: MaterialSystem,
    delta_z_low: float,
    delta_z_high: float,
    params: TabulationParams = TabulationParams(),
) -> float:
    """Critical distance where the bound state appears: bisection on y(0).

    The spectral table is rebuilt for every candidate distance; the two
    bracket endpoints must straddle y(0) = 0.
    """
    f_lo = _y_at_zero_for_distance(system, delta_z_low, params)
    f_hi = _y_at_zero_for_distance(system, delta_z_high, params)
    if np.sign(f_lo) == np.sign(f_hi):
        raise BracketError(
            f"y(0) has the same sign at both bracket ends: "
            f"y({delta_z_low:g} nm) = {f_lo:.3e}, y({delta_z_high:g} nm) = {f_hi:.3e}"
        )
    lo, hi = delta_z_low, delta_z_high
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        f_mid = _y_at_zero_for_distance(system, mid, params)
        if abs(f_mid) < _THRESHOLD_TOL_EV:
            return mid
        if np.sign(f_mid) == np.sign(f_lo):
            lo = mid
            f_lo = f_mid
        else:
            hi = mid
    raise BracketError("existence-threshold bisection failed to reach tolerance")


def _spectrum_worker(args) -> SpectrumRow:
    system, delta_z, params = args
    table = params.build(system.with_delta_z(delta_z))
    res = find_bound_state(table, system.emitter.omega0)
    return SpectrumRow(delta_z, res.varpi_b if res.exists else None)


def spectrum_map(
    system: MaterialSystem,
    delta_z_grid,
    params: TabulationParams = TabulationParams(),
    jobs: int = 1,
) -> SpectrumMap:
    """Bound-state energy for each distance in ``delta_z_grid`` (ordered rows)."""
    grid = [float(z) for z in np.atleast_1d(delta_z_grid)]
    if not grid:
        raise ValueError("delta_z_grid must be nonempty")
    tasks = [(system, z, params) for z in grid]
    if jobs > 1 and len(grid) > 1:
        from concurrent.futures import ProcessPoolExecutor

        with ProcessPoolExecutor(max_workers=jobs) as pool:
            rows = tuple(pool.map(_spectrum_worker, tasks))
    else:
        rows = tuple(_spectrum_worker(t) for t in tasks)
    return SpectrumMap(rows=rows)

"""Interface response: Fresnel coefficient, Green's tensor and spectral density.

The emitter dipole is normal to the interface, so only the zz component of
the reflected Green's tensor matters.  Everything is expressed through the
dimensionless radial wavenumber s = k_rho / k_d with k_d = sqrt(eps_d) w / c:

* propagating window s in (0, 1): oscillatory reflected waves plus the free
  radiative background (the inverse-square-root weight at s = 1 is removed
  exactly by substitution);
* evanescent tail s > 1: exponentially damped near-field terms that carry
  the surface-plasmon resonance.

The divergent free-space Lamb-shift part (real part of the s > 1 free term)
is excluded everywhere; the spectral density is finite as written.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .materials import MaterialSystem, drude_permittivity, spp_cutoff_frequency
from .quadrature import (
    DEFAULT_CONFIG,
    ConvergenceError,
    QuadConfig,
    integrate_inverse_sqrt_endpoint,
    integrate_semi_infinite,
)

_J_NEGATIVE_FLOOR = -1e-12
# highest admissible per-node relative quadrature error in exact tables
_NODE_ERROR_LIMIT = 1e-6


class PoleError(ValueError):
    """Evaluation at (or numerically on top of) a lossless resonance pole."""


class TabulationError(RuntimeError):
    """Spectral tabulation failed at a specific frequency node."""


@dataclass(frozen=True)
class WaveComponents:
    """Wavevector pieces at fixed omega and s (fields may hold arrays).

    Branch rule: Im[k_zd] >= 0 and Im[k_zm] >= 0 so reflected/transmitted
    waves decay away from the interface; real k_zd takes Re[k_zd] >= 0.
    """

    s: np.ndarray
    k_d: float        # sqrt(eps_d) * omega / (hbar c), 1/nm
    k_zd: np.ndarray  # axial wavenumber in the dielectric, 1/nm
    k_zm: np.ndarray  # axial wavenumber in the metal, 1/nm


def _branch_up(z):
    """Square root with Im >= 0 (and Re >= 0 on the nonnegative real axis)."""
    w = np.sqrt(np.asarray(z, dtype=complex))
    return np.where(w.imag < 0, -w, w)


def wave_components(system: MaterialSystem, omega: float, s) -> WaveComponents:
    if omega <= 0:
        raise ValueError("omega must be > 0")
    s = np.asarray(s, dtype=float)
    hbar_c = system.constants.hbar_c
    eps_d = system.dielectric.eps_d
    k_d = np.sqrt(eps_d) * omega / hbar_c
    eps_m = drude_permittivity(system.metal, omega)
    # (1 - s)(1 + s) keeps precision near the branch point s = 1
    k_zd = k_d * _branch_up((1.0 - s) * (1.0 + s))
    k_m_sq = eps_m * (omega / hbar_c) ** 2
    k_zm = _branch_up(k_m_sq - (s * k_d) ** 2)
    return WaveComponents(s=s, k_d=k_d, k_zd=k_zd, k_zm=k_zm)


def fresnel_rp(system: MaterialSystem, omega: float, s):
    """p-polarized reflection coefficient of the interface at (omega, s).

    r_p = (eps_d k_zm - eps_m k_zd) / (eps_d k_zm + eps_m k_zd); its pole in
    the evanescent region encodes the surface plasmon.  A vanishing
    denominator (possible only for a lossless metal on the SPP resonance)
    raises PoleError naming the offending s.
    """
    wc = wave_components(system, omega, s)
    eps_d = system.dielectric.eps_d
    eps_m = drude_permittivity(system.metal, omega)
    num = eps_d * wc.k_zm - eps_m * wc.k_zd
    den = eps_d * wc.k_zm + eps_m * wc.k_zd
    scale = np.abs(eps_d * wc.k_zm) + np.abs(eps_m * wc.k_zd)
    bad = np.abs(den) <= 1e-14 * scale
    if np.any(bad):
        s_bad = np.atleast_1d(wc.s)[np.atleast_1d(bad)][0]
        raise PoleError(
            f"fresnel_rp: denominator vanishes at s = {s_bad:.9g} "
            f"(lossless SPP pole), omega = {omega:.9g} eV"
        )
    rp = num / den
    if np.ndim(s) == 0:
        return complex(rp)
    return rp


def _reflected_factor(system: MaterialSystem, omega: float, s):
    """r_p * exp(2 i k_zd dz) on the given s array, with the branch guard."""
    wc = wave_components(system, omega, s)
    dz = system.emitter.delta_z
    expo = 2j * wc.k_zd * dz
    if np.any(expo.real > 1e-12):
        raise RuntimeError(
            "evanescent branch violation: Re[2 i k_zd dz] > 0 for s > 1 "
            f"at omega = {omega:.9g} eV"
        )
    rp = fresnel_rp(system, omega, s)
    return rp * np.exp(expo)


def _tail_decay_scale(system: MaterialSystem, omega: float) -> float:
    """Decay scale of the evanescent integrand in s, >= 1."""
    k_d = np.sqrt(system.dielectric.eps_d) * omega / system.constants.hbar_c
    return max(1.0, 1.0 / (2.0 * k_d * system.emitter.delta_z))


def _window_integrand_complex(system, omega, include_free_term, include_reflection):
    """Integrand of the s in (0, 1) window: s^3 (1 - r_p e^{2 i k_zd dz}) / sqrt(1-s^2)."""

    def f(s):
        root = np.sqrt((1.0 - s) * (1.0 + s))
        term = (1.0 + 0.0j) if include_free_term else (0.0 + 0.0j)
        if include_reflection:
            term = term - _reflected_factor(system, omega, s)
        return s**3 * term / root

    return f


def _tail_integrand_complex(system, omega):
    """Reflected evanescent integrand for s > 1 (free part excluded: its
    contribution there is purely imaginary and divergent)."""

    def f(s):
        root = _branch_up((1.0 - s) * (1.0 + s))  # = i sqrt(s^2 - 1)
        return -(s**3) * _reflected_factor(system, omega, s) / root

    return f


def _split_integrate(f, system, omega, cfg):
    """Evanescent-range integral over (1, inf): singular edge then doubling tail."""
    edge = integrate_inverse_sqrt_endpoint(f, 1.0, 2.0, "lower", cfg)
    tail = integrate_semi_infinite(f, 2.0, _tail_decay_scale(system, omega), cfg)
    return edge.value + tail.value, edge.error_estimate + tail.error_estimate


def gzz_exact(
    system: MaterialSystem,
    omega: float,
    include_free_term: bool = True,
    include_reflection: bool = True,
    cfg: QuadConfig = DEFAULT_CONFIG,
):
    """Regularized G_zz(r0, r0, omega) of the layered medium, in 1/nm.

    Evaluates (i k_d / 4 pi) * Int ds s^3 (1 - r_p e^{2 i k_zd dz})/sqrt(1-s^2)
    with the free-space ("1") term restricted to s in (0, 1): its s > 1 part
    is the divergent vacuum Lamb shift, which contributes nothing to Im[G_zz]
    and is dropped.  Im of the result times 3 gamma0 c omega^2 / omega0^3
    reproduces the spectral density.
    """
    if omega <= 0:
        raise ValueError("omega must be > 0")
    window = integrate_inverse_sqrt_endpoint(
        _window_integrand_complex(system, omega, include_free_term, include_reflection),
        0.0, 1.0, "upper", cfg,
    )
    total = window.value
    if include_reflection:
        tail_val, _ = _split_integrate(
            _tail_integrand_complex(system, omega), system, omega, cfg
        )
        total = total + tail_val
    k_d = np.sqrt(system.dielectric.eps_d) * omega / system.constants.hbar_c
    return 1j * k_d / (4.0 * np.pi) * total


def _j_prefactor(system: MaterialSystem, omega: float) -> float:
    em = system.emitter
    return (
        3.0 * em.gamma0 * np.sqrt(system.dielectric.eps_d) * omega**3
        / (4.0 * np.pi * em.omega0**3)
    )


def _j_exact_with_error(
    system: MaterialSystem,
    omega: float,
    cfg: QuadConfig,
    include_free_term: bool,
    include_reflection: bool,
):
    """Exact spectral density and its propagated quadrature error bound.

    Real-valued integrands are used throughout so that the error estimate
    applies to the physically relevant real part directly.
    """
    if omega <= 0:
        raise ValueError("omega must be > 0")

    def f_window(s):
        root = np.sqrt((1.0 - s) * (1.0 + s))
        term = 1.0 if include_free_term else 0.0
        if include_reflection:
            term = term - _reflected_factor(system, omega, s).real
        return s**3 * term / root

    window = integrate_inverse_sqrt_endpoint(f_window, 0.0, 1.0, "upper", cfg)
    value = window.value.real
    err = window.error_estimate

    if include_reflection:
        dz = system.emitter.delta_z
        k_d = np.sqrt(system.dielectric.eps_d) * omega / system.constants.hbar_c

        def f_tail(s):
            root = np.sqrt((s - 1.0) * (s + 1.0))
            rp = fresnel_rp(system, omega, s)
            return -rp.imag * s**3 * np.exp(-2.0 * k_d * dz * root) / root

        tail_val, tail_err = _split_integrate(f_tail, system, omega, cfg)
        value += tail_val.real
        err += tail_err

    pref = _j_prefactor(system, omega)
    j = pref * value
    if j < _J_NEGATIVE_FLOOR:
        raise ValueError(
            f"spectral density {j:.3e} eV below the -1e-12 floor at "
            f"omega = {omega:.9g} eV"
        )
    return max(j, 0.0), pref * err


def spectral_density_exact(
    system: MaterialSystem,
    omega: float,
    include_free_term: bool = True,
    include_reflection: bool = True,
    cfg: QuadConfig = DEFAULT_CONFIG,
) -> float:
    """Exact spectral density J(omega) in eV from the full s-integral."""
    j, _ = _j_exact_with_error(system, omega, cfg, include_free_term, include_reflection)
    return j


def gzz_quasistatic(system: MaterialSystem, omega: float) -> complex:
    """Quasistatic (c -> infinity) limit of the reflected G_zz, in 1/nm.

    Diverges on the lossless resonance eps_d + eps_m = 0, which raises
    PoleError.
    """
    if omega <= 0:
        raise ValueError("omega must be > 0")
    eps_d = system.dielectric.eps_d
    eps_m = drude_permittivity(system.metal, omega)
    den = eps_d + eps_m
    if abs(den) <= 1e-9 * (abs(eps_d) + abs(eps_m)):
        raise PoleError(
            f"gzz_quasistatic: eps_d + eps_m vanishes at omega = {omega:.9g} eV "
            "(lossless surface-plasmon resonance)"
        )
    c = system.constants.hbar_c
    dz = system.emitter.delta_z
    return -(c**2 / (16.0 * np.pi * omega**2 * eps_d)) * (eps_d - eps_m) / (den * dz**3)


def spectral_density_quasistatic(system: MaterialSystem, omega: float) -> float:
    """Spectral density from the quasistatic Green's function (reflected part only)."""
    g = gzz_quasistatic(system, omega)
    em = system.emitter
    c = system.constants.hbar_c
    j = 3.0 * em.gamma0 * c * omega**2 * g.imag / em.omega0**3
    if j < _J_NEGATIVE_FLOOR:
        raise ValueError(f"quasistatic spectral density negative at omega = {omega:.9g}")
    return max(j, 0.0)


def lorentzian_amplitude(system: MaterialSystem) -> float:
    """Peak-strength prefactor A of the Lorentzian spectral density, eV^2 / eV.

    A = gamma0 omega_p (3/16 pi) (omega_c/omega_p)^3 (c/(omega0 dz))^3; the
    Lorentzian integrates to pi A over the full line.
    """
    em = system.emitter
    omega_c = spp_cutoff_frequency(system.metal, system.dielectric)
    c = system.constants.hbar_c
    return (
        em.gamma0 * system.metal.omega_p * (3.0 / (16.0 * np.pi))
        * (omega_c / system.metal.omega_p) ** 3
        * (c / (em.omega0 * em.delta_z)) ** 3
    )


def spectral_density_lorentzian(
    system: MaterialSystem, omega, convention: str = "kernel-matched"
):
    """Lorentzian approximation of J(omega); negative omega allowed.

    Both conventions return the same curve A (gamma_p/2) / ((w - w_c)^2 +
    (gamma_p/2)^2): requiring the full-line Fourier transform to equal
    (pi A) exp(-(i w_c + gamma_p/2) tau) fixes the same normalization, so
    the convention switch only affects the pseudomode coupling, not J.
    """
    if convention not in ("as-printed", "kernel-matched"):
        raise ValueError(f"unknown convention {convention!r}")
    w = np.asarray(omega, dtype=float)
    amp = lorentzian_amplitude(system)
    omega_c = spp_cutoff_frequency(system.metal, system.dielectric)
    half = system.metal.gamma_p / 2.0
    j = amp * half / ((w - omega_c) ** 2 + half**2)
    if np.ndim(omega) == 0:
        return float(j)
    return j


@dataclass
class SpectralTable:
    """Tabulated spectral density with a linear interpolation contract.

    J is interpolated linearly between nodes and is zero outside
    [omega_min, omega_max]; integral operators in other modules additionally
    use the omega^3 extension below the first node when omega_min > 0.
    """

    omega_grid: np.ndarray
    j_values: np.ndarray
    node_errors: np.ndarray | None = None

    def __post_init__(self):
        grid = np.ascontiguousarray(np.asarray(self.omega_grid, dtype=float))
        j = np.ascontiguousarray(np.asarray(self.j_values, dtype=float))
        if grid.ndim != 1 or grid.shape != j.shape or grid.size < 2:
            raise ValueError("omega_grid and j_values must be matching 1-d arrays")
        if np.any(np.diff(grid) <= 0):
            raise ValueError("omega_grid must be strictly increasing")
        if np.any(j < _J_NEGATIVE_FLOOR):
            worst = float(j.min())
            raise ValueError(f"j_values below the -1e-12 floor (min {worst:.3e})")
        j = np.where(j < 0.0, 0.0, j)
        grid.flags.writeable = False
        j.flags.writeable = False
        object.__setattr__(self, "omega_grid", grid)
        object.__setattr__(self, "j_values", j)

    @property
    def omega_min(self) -> float:
        return float(self.omega_grid[0])

    @property
    def omega_max(self) -> float:
        return float(self.omega_grid[-1])

    def j_at(self, omega):
        """Linear interpolation, zero outside the tabulated support."""
        return np.interp(omega, self.omega_grid, self.j_values, left=0.0, right=0.0)

    def write_csv(self, path) -> None:
        with open(path, "w", encoding="utf-8") as fh:
            fh.write("omega_ev,j_ev\n")
            for w, j in zip(self.omega_grid, self.j_values):
                fh.write(f"{w:.12g},{j:.12g}\n")


def tabulation_grid(
    system: MaterialSystem, omega_min: float, omega_max: float, base_points: int
) -> np.ndarray:
    """Frequency grid: uniform base plus gamma_p/20 refinement around omega_c."""
    if not 0 < omega_min < omega_max:
        raise ValueError("requires 0 < omega_min < omega_max")
    if base_points < 2:
        raise ValueError("base_points must be >= 2")
    pieces = [np.linspace(omega_min, omega_max, base_points)]
    gamma_p = system.metal.gamma_p
    if gamma_p > 0:
        # gamma_p/40 keeps the linear-interpolation error at the resonance
        # peak below 1e-3 relative (the grid invariant demands <= gamma_p/20)
        omega_c = spp_cutoff_frequency(system.metal, system.dielectric)
        lo = max(omega_min, omega_c - 5.0 * gamma_p)
        hi = min(omega_max, omega_c + 5.0 * gamma_p)
        if hi > lo:
            n = int(np.ceil((hi - lo) / (gamma_p / 40.0))) + 1
            pieces.append(np.linspace(lo, hi, n))
    grid = np.unique(np.concatenate(pieces))
    # drop near-coincident nodes left over from merging the two ladders
    keep = np.concatenate([[True], np.diff(grid) > 1e-9])
    return grid[keep]


def _tabulate_nodes(args):
    """Worker for parallel tabulation: J with error on a slice of nodes."""
    system, omegas, cfg, include_free_term = args
    vals = np.empty(len(omegas))
    errs = np.empty(len(omegas))
    for i, w in enumerate(omegas):
        try:
            vals[i], errs[i] = _j_exact_with_error(system, w, cfg, include_free_term, True)
        except ConvergenceError as exc:
            raise TabulationError(
                f"spectral tabulation failed at omega = {w:.9g} eV: {exc}"
            ) from exc
    return vals, errs


def tabulate_spectral_density(
    system: MaterialSystem,
    omega_min: float = 0.02,
    omega_max: float = 6.0,
    base_points: int = 600,
    which: str = "exact",
    cfg: QuadConfig = DEFAULT_CONFIG,
    include_free_term: bool = True,
    jobs: int = 1,
) -> SpectralTable:
    """Build a SpectralTable of the chosen flavor on the refined grid.

    Exact tables carry per-node quadrature error bounds and refuse nodes
    whose relative error exceeds 1e-6.  Node evaluation order is fixed by
    the grid, so results are identical for any ``jobs`` count.
    """
    grid = tabulation_grid(system, omega_min, omega_max, base_points)
    if which == "exact":
        try:
            if jobs > 1 and grid.size > 8:
                from concurrent.futures import ProcessPoolExecutor

                chunks = np.array_split(np.arange(grid.size), min(jobs * 4, grid.size))
                tasks = [(system, grid[idx], cfg, include_free_term) for idx in chunks]
                vals = np.empty(grid.size)
                errs = np.empty(grid.size)
                with ProcessPoolExecutor(max_workers=jobs) as pool:
                    for idx, (v, e) in zip(chunks, pool.map(_tabulate_nodes, tasks)):
                        vals[idx] = v
                        errs[idx] = e
            else:
                vals, errs = _tabulate_nodes((system, grid, cfg, include_free_term))
        except ConvergenceError as exc:
            raise TabulationError(f"spectral tabulation failed: {exc}") from exc
        rel = errs / np.maximum(np.abs(vals), 1e-300)
        bad = (rel > _NODE_ERROR_LIMIT) & (np.abs(vals) > cfg.abs_tol)
        if np.any(bad):
            w_bad = grid[bad][0]
            raise TabulationError(
                f"per-node quadrature error above {_NODE_ERROR_LIMIT:g} relative "
                f"at omega = {w_bad:.9g} eV"
            )
        return SpectralTable(grid, vals, errs)
    if which == "quasistatic":
        vals = np.array([spectral_density_quasistatic(system, w) for w in grid])
        return SpectralTable(grid, vals)
    if which == "lorentzian":
        return SpectralTable(grid, spectral_density_lorentzian(system, grid))
    raise ValueError(f"unknown table flavor {which!r}")

"""Experiment drivers behind the CLI subcommands.

Each driver resolves a RunConfig, runs its piece of the pipeline, and emits
CSV files (the record) plus SVG figures into the output directory, together
with a resolved-configuration echo that reparses to the same RunConfig.
Sweep points execute concurrently up to the ``jobs`` limit; rows are always
written in input order, so outputs are byte-identical for any worker count.
"""

from __future__ import annotations

from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import bound_state as bs
from . import dynamics, kernel, pseudomode, spectral
from .config import RunConfig, render_config
from .materials import MaterialSystem
from .optimize import grid_then_golden_maximize
from .report import line_figure, scatter_figure, write_csv

# solver guard is dt <= 0.1/scale; confirmation runs stay just inside it
_DT_HEADROOM = 0.09


def _out_path(out_dir) -> Path:
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    return out


def _write_echo(cfg: RunConfig, out: Path) -> None:
    (out / "config_resolved.cfg").write_text(render_config(cfg), encoding="utf-8")


def _tab_params(cfg: RunConfig) -> bs.TabulationParams:
    return bs.TabulationParams(
        omega_min=cfg.omega_min_ev,
        omega_max=cfg.omega_max_ev,
        base_points=cfg.base_points,
        quad=cfg.quad_config(),
        include_free_term=cfg.include_free_term,
    )


def _build_table(cfg: RunConfig, system: MaterialSystem | None = None, jobs: int = 1):
    system = system or cfg.material_system()
    return _tab_params(cfg).build(system, jobs=jobs)


def run_spectral(cfg: RunConfig, out_dir, jobs: int = 1, which: str = "exact") -> Path:
    """Tabulate the chosen spectral density and emit spectral.csv / spectral.svg."""
    out = _out_path(out_dir)
    system = cfg.material_system()
    table = spectral.tabulate_spectral_density(
        system,
        omega_min=cfg.omega_min_ev,
        omega_max=cfg.omega_max_ev,
        base_points=cfg.base_points,
        which=which,
        cfg=cfg.quad_config(),
        include_free_term=cfg.include_free_term,
        jobs=jobs,
    )
    csv_path = out / "spectral.csv"
    table.write_csv(csv_path)
    line_figure(
        out / "spectral.svg",
        table.omega_grid,
        [(which, table.j_values)],
        "omega (eV)",
        "J (eV)",
        title=f"spectral density, dz = {cfg.delta_z_nm:g} nm",
        logy=True,
    )
    _write_echo(cfg, out)
    return csv_path


def run_kernel(cfg: RunConfig, out_dir, jobs: int = 1) -> Path:
    """Tabulate the memory kernel on the dynamics grid; kernel.csv / kernel.svg."""
    out = _out_path(out_dir)
    table = _build_table(cfg, jobs=jobs)
    ktab = kernel.tabulate_kernel(table, cfg.t_max_inv_ev, cfg.dt_inv_ev)
    csv_path = out / "kernel.csv"
    ktab.write_csv(csv_path)
    show = ktab.tau_grid <= min(200.0, ktab.tau_grid[-1])
    line_figure(
        out / "kernel.svg",
        ktab.tau_grid[show],
        [("Re K", ktab.k_values[show].real), ("Im K", ktab.k_values[show].imag)],
        "tau (1/eV)",
        "K (eV^2)",
        title=f"memory kernel, dz = {cfg.delta_z_nm:g} nm",
    )
    _write_echo(cfg, out)
    return csv_path


@dataclass(frozen=True)
class EvolutionOutputs:
    csv: Path
    final_pe: float
    late_mean_pe: float


def _evolve(cfg: RunConfig, system: MaterialSystem, jobs: int = 1):
    table = _build_table(cfg, system, jobs=jobs)
    ktab = kernel.tabulate_kernel(table, cfg.t_max_inv_ev, cfg.dt_inv_ev)
    traj = dynamics.solve_volterra(ktab, system.emitter.omega0, cfg.t_max_inv_ev, cfg.dt_inv_ev)
    return table, dynamics.extract_rates(traj)


def run_evolution(cfg: RunConfig, out_dir, jobs: int = 1) -> EvolutionOutputs:
    """Excited-state population evolution; evolution.csv / evolution.svg."""
    out = _out_path(out_dir)
    system = cfg.material_system()
    _, traj = _evolve(cfg, system, jobs)
    csv_path = out / "evolution.csv"
    traj.write_csv(csv_path)
    line_figure(
        out / "evolution.svg",
        traj.t_grid,
        [("P_e", traj.pe)],
        "t (1/eV)",
        "P_e(t)",
        title=f"population evolution, dz = {cfg.delta_z_nm:g} nm",
    )
    _write_echo(cfg, out)
    return EvolutionOutputs(csv_path, float(traj.pe[-1]), traj.late_mean_pe())


def run_rates(cfg: RunConfig, out_dir, jobs: int = 1) -> Path:
    """Time-dependent decay rate and frequency shift; rates.csv / rates.svg."""
    out = _out_path(out_dir)
    system = cfg.material_system()
    _, traj = _evolve(cfg, system, jobs)
    csv_path = write_csv(
        out / "rates.csv",
        "t_inv_ev,gamma_t,omega_t,rate_flag",
        (
            (
                t,
                None if flag else g,
                None if flag else w,
                int(flag),
            )
            for t, g, w, flag in zip(
                traj.t_grid, traj.gamma_t, traj.omega_t, traj.rate_flags
            )
        ),
    )
    ok = ~traj.rate_flags
    line_figure(
        out / "rates.svg",
        traj.t_grid[ok],
        [("gamma(t)", traj.gamma_t[ok])],
        "t (1/eV)",
        "gamma (eV)",
        title=f"decay rate, dz = {cfg.delta_z_nm:g} nm",
    )
    _write_echo(cfg, out)
    return csv_path


def _bound_state_row(args):
    cfg, delta_z = args
    system = cfg.material_system().with_delta_z(delta_z)
    table = _build_table(cfg, system)
    res = bs.find_bound_state(table, system.emitter.omega0)
    return (
        delta_z,
        res.exists,
        res.varpi_b,
        res.z_weight,
        bs.steady_population(res) if res.exists else None,
    )


def _ordered_map(worker, tasks, jobs: int):
    if jobs > 1 and len(tasks) > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            return list(pool.map(worker, tasks))
    return [worker(t) for t in tasks]


def run_bound_state(cfg: RunConfig, out_dir, jobs: int = 1, values=None) -> Path:
    """Bound-state existence, energy and weight per distance; bound_state.csv."""
    out = _out_path(out_dir)
    zs = list(values) if values is not None else [cfg.delta_z_nm]
    rows = _ordered_map(_bound_state_row, [(cfg, z) for z in zs], jobs)
    csv_path = write_csv(
        out / "bound_state.csv",
        "delta_z_nm,exists,varpi_b_ev,z_weight,z_squared",
        rows,
    )
    _write_echo(cfg, out)
    return csv_path


def run_spectrum(cfg: RunConfig, out_dir, jobs: int = 1, values=None) -> Path:
    """Energy spectrum (bound level vs distance); spectrum.csv / spectrum.svg."""
    out = _out_path(out_dir)
    zs = list(values) if values is not None else list(np.linspace(1.0, 2.0, 11))
    spec_map = bs.spectrum_map(cfg.material_system(), zs, _tab_params(cfg), jobs=jobs)
    csv_path = write_csv(
        out / "spectrum.csv",
        "delta_z_nm,bound_energy_ev,band_edge_ev",
        ((r.delta_z, r.bound_energy, spec_map.band_edge) for r in spec_map.rows),
    )
    have = [r for r in spec_map.rows if r.bound_energy is not None]
    scatter_figure(
        out / "spectrum.svg",
        [r.delta_z for r in have],
        [r.bound_energy for r in have],
        "dz (nm)",
        "bound-state energy (eV)",
        hline=spec_map.band_edge,
        title="energy spectrum vs distance",
    )
    _write_echo(cfg, out)
    return csv_path


def run_comparison(cfg: RunConfig, out_dir, jobs: int = 1) -> pseudomode.ComparisonResult:
    """Exact versus pseudomode dynamics; comparison CSVs and figure."""
    out = _out_path(out_dir)
    result = pseudomode.compare_exact_vs_pseudomode(
        cfg.material_system(),
        cfg.t_max_inv_ev,
        cfg.dt_inv_ev,
        convention=cfg.convention,
        params=_tab_params(cfg),
        jobs=jobs,
    )
    write_csv(
        out / "comparison.csv",
        "t_inv_ev,pe_exact,pe_pseudomode",
        zip(result.exact.t_grid, result.exact.pe, result.pseudomode.pe),
    )
    write_csv(
        out / "comparison_summary.csv",
        "delta_z_nm,bound_state,max_abs_diff,late_diff,convention",
        [(
            result.delta_z,
            result.bound_state_exists,
            result.max_abs_diff,
            result.late_diff,
            result.convention,
        )],
    )
    line_figure(
        out / "comparison.svg",
        result.exact.t_grid,
        [("exact", result.exact.pe), ("pseudomode", result.pseudomode.pe)],
        "t (1/eV)",
        "P_e(t)",
        title=f"exact vs pseudomode, dz = {cfg.delta_z_nm:g} nm ({result.convention})",
    )
    _write_echo(cfg, out)
    return result


def _steady_point(args):
    cfg, delta_z = args
    system = cfg.material_system().with_delta_z(delta_z)
    table = _build_table(cfg, system)
    res = bs.find_bound_state(table, system.emitter.omega0)
    z2 = bs.steady_population(res)
    ktab = kernel.tabulate_kernel(table, cfg.t_max_inv_ev, cfg.dt_inv_ev)
    traj = dynamics.solve_volterra(
        ktab, system.emitter.omega0, cfg.t_max_inv_ev, cfg.dt_inv_ev
    )
    return delta_z, traj.late_mean_pe(), z2, res.exists


def run_steady_sweep(cfg: RunConfig, out_dir, jobs: int = 1, values=None) -> Path:
    """Long-time population vs distance against Z^2; sweep_z.csv / sweep_z.svg."""
    out = _out_path(out_dir)
    zs = list(values) if values is not None else [round(z, 10) for z in np.arange(1.0, 2.01, 0.2)]
    rows = _ordered_map(_steady_point, [(cfg, z) for z in zs], jobs)
    for delta_z, pe_inf, z2, exists in rows:
        gap = abs(pe_inf - z2) / z2 if z2 > 0 else float("nan")
        print(
            f"sweep-z dz={delta_z:g} nm: pe_infinity={pe_inf:.6g} z_squared={z2:.6g} "
            f"exists={exists} rel_gap={gap:.3g}",
            flush=True,
        )
    csv_path = write_csv(
        out / "sweep_z.csv",
        "delta_z_nm,pe_infinity_numeric,z_squared,exists",
        rows,
    )
    line_figure(
        out / "sweep_z.svg",
        [r[0] for r in rows],
        [
            ("pe_infinity", [r[1] for r in rows]),
            ("Z^2", [r[2] for r in rows]),
        ],
        "dz (nm)",
        "steady population",
        title="long-time population vs distance",
    )
    _write_echo(cfg, out)
    return csv_path


def _confirmation_dt(cfg: RunConfig, table, omega0: float) -> float:
    """Time step for a confirmation run that respects the solver guard."""
    k0 = kernel.memory_kernel(table, 0.0).real
    scale = max(abs(omega0), np.sqrt(max(k0, 0.0)), table.omega_max)
    return min(cfg.dt_inv_ev, _DT_HEADROOM / scale)


def optimize_trapped_population(cfg: RunConfig, eps_d: float):
    """Best trapped population over distance for one permittivity.

    Returns ((eps_d, dz_opt, pe_max), confirmation) where confirmation is
    (eps_d, dz_opt, pe_max, pe_confirmed, rel_gap) or None when no bound
    state exists anywhere on the bracket.
    """
    return _eps_point((cfg, eps_d))


def _eps_point(args):
    cfg, eps_d = args
    system = cfg.material_system().with_eps_d(eps_d)
    omega0 = system.emitter.omega0
    params = _tab_params(cfg)

    def z_squared(delta_z: float) -> float:
        table = params.build(system.with_delta_z(delta_z))
        return bs.steady_population(bs.find_bound_state(table, omega0))

    z_opt, pe_max = grid_then_golden_maximize(
        z_squared,
        cfg.sweep_bracket_low_nm,
        cfg.sweep_bracket_high_nm,
        cfg.sweep_coarse_points,
        cfg.sweep_tol_nm,
    )
    if pe_max <= 0.0:
        return (eps_d, None, None), None
    # full-dynamics confirmation at the winning distance guards the proxy
    best_system = system.with_delta_z(z_opt)
    table = params.build(best_system)
    dt = _confirmation_dt(cfg, table, omega0)
    ktab = kernel.tabulate_kernel(table, cfg.t_max_inv_ev, dt)
    traj = dynamics.solve_volterra(ktab, omega0, cfg.t_max_inv_ev, dt)
    confirmed = traj.late_mean_pe()
    gap = abs(confirmed - pe_max) / pe_max
    return (eps_d, z_opt, pe_max), (eps_d, z_opt, pe_max, confirmed, gap)


def run_eps_sweep(cfg: RunConfig, out_dir, jobs: int = 1, values=None) -> Path:
    """Maximal trapped population over distance per permittivity.

    Maximizes the bound-state proxy Z^2(dz) on the configured bracket
    (coarse grid, then golden-section refinement of the best cell) and
    confirms each winner with one full dynamics run.  A bracket with no
    bound state anywhere yields a row with empty fields and the sweep
    continues.
    """
    out = _out_path(out_dir)
    eps_values = list(values) if values is not None else [5.0, 10.0, 25.0]
    results = _ordered_map(_eps_point, [(cfg, e) for e in eps_values], jobs)
    rows = [r[0] for r in results]
    confirmations = [r[1] for r in results if r[1] is not None]
    for row in confirmations:
        print(
            f"sweep-eps eps_d={row[0]:g}: dz_opt={row[1]:.4f} nm pe_max={row[2]:.6g} "
            f"confirmed={row[3]:.6g} rel_gap={row[4]:.3g}",
            flush=True,
        )
    csv_path = write_csv(out / "sweep_eps.csv", "eps_d,delta_z_opt_nm,pe_max", rows)
    write_csv(
        out / "sweep_eps_confirmation.csv",
        "eps_d,delta_z_opt_nm,pe_max_proxy,pe_confirmed,rel_gap",
        confirmations,
    )
    have = [r for r in rows if r[2] is not None]
    scatter_figure(
        out / "sweep_eps.svg",
        [r[0] for r in have],
        [r[2] for r in have],
        "eps_d",
        "max trapped population",
        title="maximal trapped population vs permittivity",
    )
    _write_echo(cfg, out)
    return csv_path

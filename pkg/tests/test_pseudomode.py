import numpy as np
import pytest

from plasmonqe.bound_state import TabulationParams
from plasmonqe.dynamics import solve_volterra, solve_volterra_analytic
from plasmonqe.kernel import KernelTable, exponential_kernel, tabulate_kernel
from plasmonqe.pseudomode import (
    PseudomodeParams,
    compare_exact_vs_pseudomode,
    coupling_g,
    pseudomode_amplitudes,
    solve_pseudomode,
)
from plasmonqe.spectral import SpectralTable, lorentzian_amplitude


class TestCoupling:
    def test_as_printed_value(self, system_12):
        params = coupling_g(system_12, "as-printed")
        assert params.g**2 == pytest.approx(0.81256531, rel=1e-7)
        assert params.g == pytest.approx(0.901424, rel=1e-6)
        assert params.omega_c == pytest.approx(1.62433, abs=1e-5)
        assert params.gamma_p == 0.1

    def test_distance_doubling_eighth(self, system_12):
        g1 = coupling_g(system_12, "as-printed").g
        g2 = coupling_g(system_12.with_delta_z(2.4), "as-printed").g
        assert (g2 / g1) ** 2 == pytest.approx(1.0 / 8.0, rel=1e-12)

    def test_convention_ratio_is_pi(self, system_12):
        ap = coupling_g(system_12, "as-printed")
        km = coupling_g(system_12, "kernel-matched")
        assert km.g**2 / ap.g**2 == pytest.approx(np.pi, rel=1e-12)

    def test_unknown_convention_rejected(self, system_12):
        with pytest.raises(ValueError):
            coupling_g(system_12, "other")


class TestClosedForm:
    def test_decoupled_emitter_stays_excited(self):
        params = PseudomodeParams(1.6, 0.1, 0.0)
        traj = solve_pseudomode(params, 1.2, 50.0, 0.01)
        assert np.max(np.abs(traj.pe - 1.0)) < 1e-14

    def test_resonant_lossless_rabi(self):
        g = 0.4
        params = PseudomodeParams(1.0, 0.0, g)
        traj = solve_pseudomode(params, 1.0, 40.0, 0.005)
        assert np.max(np.abs(traj.pe - np.cos(g * traj.t_grid) ** 2)) < 1e-12

    def test_norm_bookkeeping(self):
        # d/dt (|c_e|^2 + |c_a|^2) = -gamma_p |c_a|^2 along the trajectory
        params = PseudomodeParams(1.624, 0.1, 0.7)
        t = np.linspace(0.0, 60.0, 20001)
        c_e, c_a = pseudomode_amplitudes(params, 1.2, t)
        norm = np.abs(c_e) ** 2 + np.abs(c_a) ** 2
        dnorm = np.gradient(norm, t[1] - t[0], edge_order=2)
        expected = -params.gamma_p * np.abs(c_a) ** 2
        assert np.max(np.abs(dnorm - expected)) < 1e-5
        assert np.all(np.diff(norm) <= 1e-12)

    def test_population_decays_when_damped(self):
        params = PseudomodeParams(1.624, 0.1, 0.9)
        traj = solve_pseudomode(params, 1.2, 2000.0, 0.05)
        assert np.all(traj.pe <= 1.0 + 1e-12)
        assert traj.pe[-1] < 1e-6

    def test_equivalence_oracle_random_draws(self):
        # exponential-kernel Volterra solve against the closed form: the two
        # formulations are the same mathematics
        rng = np.random.default_rng(42)
        for _ in range(10):
            g = rng.uniform(0.01, 1.0)
            omega_c = rng.uniform(0.05, 0.4)
            omega0 = rng.uniform(0.05, 0.4)
            gamma_p = rng.uniform(0.02, 0.3)
            params = PseudomodeParams(omega_c, gamma_p, g)
            kf = exponential_kernel(g * g, omega_c, gamma_p)
            traj = solve_volterra_analytic(kf, omega0, 3.0, 1e-3)
            pm = solve_pseudomode(params, omega0, 3.0, 1e-3)
            assert np.max(np.abs(traj.pe - pm.pe)) < 1e-6


class TestComparison:
    def test_lorentzian_table_on_full_line_reproduces_pseudomode(self, system_12):
        # analytic continuation of the spectrum to the whole line removes the
        # band edge, making the exact pipeline and the effective model agree
        params = coupling_g(system_12, "kernel-matched")
        amp = lorentzian_amplitude(system_12)
        half = params.gamma_p / 2.0
        wc = params.omega_c
        core = np.arange(wc - 5.0, wc + 5.0 + 1e-12, params.gamma_p / 40.0)
        wings = np.geomspace(5.0, 2000.0, 500)
        grid = np.unique(np.concatenate([wc - wings, core, wc + wings]))
        j = amp * half / ((grid - wc) ** 2 + half**2)
        table = SpectralTable(grid, j)
        ktab = tabulate_kernel(table, 50.0, 5e-4)
        # the far synthetic wings put omega_max ~ 2000 eV at J ~ 1e-9; that
        # support bound has no dynamical weight, so lift it from the dt guard
        ktab = KernelTable(ktab.tau_grid, ktab.k_values)
        exact = solve_volterra(ktab, 1.2, 50.0, 5e-4)
        pm = solve_pseudomode(params, 1.2, 50.0, 5e-4)
        assert np.max(np.abs(exact.pe - pm.pe)) < 1e-4

    def test_regime_comparison(self, system_20):
        result = compare_exact_vs_pseudomode(
            system_20, 200.0, 0.01, params=TabulationParams(base_points=300)
        )
        assert not result.bound_state_exists
        assert result.convention == "kernel-matched"
        assert result.late_diff < 1e-2
        assert result.exact.t_grid.size == result.pseudomode.t_grid.size

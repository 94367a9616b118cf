import numpy as np
import pytest

from plasmonqe.bound_state import (
    BoundStateResult,
    BracketError,
    TabulationParams,
    existence_threshold,
    find_bound_state,
    self_energy,
    self_energy_derivative,
    spectrum_map,
    steady_population,
    y_function,
)
from plasmonqe.spectral import SpectralTable


def zero_table():
    return SpectralTable(np.linspace(0.5, 3.0, 11), np.zeros(11))


class TestSelfEnergy:
    def test_zero_spectral_density(self):
        assert self_energy(zero_table(), 0.0) == 0.0
        assert self_energy(zero_table(), -5.0) == 0.0

    def test_rejects_continuum_varpi(self, table_12):
        with pytest.raises(ValueError):
            self_energy(table_12, 0.5)

    def test_narrow_line_delta_limit(self, narrow_lorentzian_table):
        # weight 4 at omega = 2: Int J/(w - 0) -> W / omega_c
        val = self_energy(narrow_lorentzian_table, 0.0)
        assert val == pytest.approx(4.0 / 2.0, rel=1e-3)

    def test_matches_dense_trapezoid(self, table_12):
        varpi = -0.7
        w = table_12.omega_grid
        dense = np.unique(
            np.concatenate([np.linspace(w[i], w[i + 1], 8) for i in range(w.size - 1)])
        )
        jd = table_12.j_at(dense)
        oracle = np.trapezoid(jd / (dense - varpi), dense)
        # the omega^3 extension below the first node contributes ~5e-6
        # relative here, within the comparison tolerance
        val = self_energy(table_12, varpi)
        assert val == pytest.approx(oracle, rel=1e-4)

    def test_derivative_consistent_with_finite_differences(self, table_12):
        varpi, h = -0.5, 1e-5
        fd = (self_energy(table_12, varpi + h) - self_energy(table_12, varpi - h)) / (2 * h)
        assert self_energy_derivative(table_12, varpi) == pytest.approx(fd, rel=1e-8)


class TestYFunction:
    def test_flat_zero_j(self):
        table = zero_table()
        for v in (0.0, -1.0, -100.0):
            assert y_function(table, 1.2, v) == 1.2

    def test_left_bracket_guaranteed(self, table_12):
        v = -1e3
        assert y_function(table_12, 1.2, v) - v > 0

    def test_narrow_line_existence_arithmetic(self, narrow_lorentzian_table):
        # y(0) = omega0 - W/omega_c = 1 - 2 = -1
        y0 = y_function(narrow_lorentzian_table, 1.0, 0.0)
        assert y0 == pytest.approx(-1.0, abs=2e-3)

    def test_y_minus_varpi_strictly_decreasing(self, table_12, table_20):
        for table in (table_12, table_20):
            vs = np.linspace(-30.0, 0.0, 100)
            f = np.array([y_function(table, 1.2, v) - v for v in vs])
            assert np.all(np.diff(f) < 0)


class TestFindBoundState:
    def test_zero_j_no_bound_state(self):
        res = find_bound_state(zero_table(), 1.2)
        assert not res.exists
        assert res.varpi_b is None
        assert steady_population(res) == 0.0

    def test_narrow_line_fixture(self, narrow_lorentzian_table):
        # delta limit: (omega0 - v)(omega_c - v) = W gives v = (3 - sqrt(17))/2
        res = find_bound_state(narrow_lorentzian_table, 1.0)
        assert res.exists
        assert res.varpi_b == pytest.approx(-0.5616, abs=1e-3)
        assert res.z_weight == pytest.approx(0.6213, abs=1e-3)
        assert steady_population(res) == pytest.approx(0.3860, abs=1.5e-3)

    def test_default_regime_split(self, table_12, table_20):
        assert find_bound_state(table_12, 1.2).exists
        assert not find_bound_state(table_20, 1.2).exists

    def test_root_satisfies_pole_equation(self, table_12):
        res = find_bound_state(table_12, 1.2)
        assert abs(y_function(table_12, 1.2, res.varpi_b) - res.varpi_b) < 1e-9

    def test_weight_from_numerical_derivative(self, table_12):
        res = find_bound_state(table_12, 1.2)
        h = 1e-5
        dsigma = (
            self_energy(table_12, res.varpi_b + h)
            - self_energy(table_12, res.varpi_b - h)
        ) / (2 * h)
        z_numeric = 1.0 / (1.0 + dsigma)
        assert abs(res.z_weight - z_numeric) < 1e-6

    def test_exists_flag_matches_diagnostic(self, table_12, table_20):
        for table in (table_12, table_20):
            res = find_bound_state(table, 1.2)
            assert res.exists == (res.y_at_zero < 0)

    def test_result_type_validation(self):
        with pytest.raises(ValueError):
            BoundStateResult(True, 0.5, 0.5, -1.0)
        with pytest.raises(ValueError):
            BoundStateResult(True, -0.5, 1.5, -1.0)
        with pytest.raises(ValueError):
            BoundStateResult(False, None, None, -1.0)


class TestThresholdAndMap:
    def test_threshold_inside_bracket(self, system_12):
        params = TabulationParams(base_points=300)
        z_star = existence_threshold(system_12, 1.2, 2.0, params)
        assert 1.2 < z_star < 2.0
        # local sign check: the bound state exists just below, not just above
        y_lo = y_function(params.build(system_12.with_delta_z(z_star - 0.1)), 1.2, 0.0)
        y_hi = y_function(params.build(system_12.with_delta_z(z_star + 0.1)), 1.2, 0.0)
        assert y_lo < 0 < y_hi

    def test_threshold_moves_down_with_weaker_emitter(self, system_12):
        # 10x smaller gamma0 needs tighter confinement: at the old threshold
        # the bound state must be gone
        params = TabulationParams(base_points=300)
        z_star = existence_threshold(system_12, 1.2, 2.0, params)
        weaker = system_12.with_gamma0(1e-5)
        y_weak = y_function(params.build(weaker.with_delta_z(z_star)), 1.2, 0.0)
        assert y_weak > 0

    def test_same_sign_bracket_rejected(self, system_12):
        with pytest.raises(BracketError):
            existence_threshold(system_12, 1.9, 2.0, TabulationParams(base_points=200))

    def test_spectrum_map_rows(self, system_12):
        params = TabulationParams(base_points=300)
        result = spectrum_map(system_12, [1.2, 2.0], params)
        assert result.band_edge == 0.0
        assert len(result.rows) == 2
        assert result.rows[0].delta_z == 1.2
        assert result.rows[0].bound_energy is not None and result.rows[0].bound_energy < 0
        assert result.rows[1].bound_energy is None

    def test_bound_level_deepens_with_confinement(self, system_12):
        params = TabulationParams(base_points=300)
        grid = np.linspace(0.6, 1.25, 10)
        result = spectrum_map(system_12, grid, params)
        energies = [r.bound_energy for r in result.rows]
        assert all(e is not None for e in energies)
        assert np.all(np.diff(energies) > 0)  # shallower as dz grows

    def test_empty_grid_rejected(self, system_12):
        with pytest.raises(ValueError):
            spectrum_map(system_12, [])

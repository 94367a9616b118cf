"""Shared fixtures.

The exact spectral tables and the full-length dynamics runs are expensive,
so they are built once per session and shared by the module tests and the
acceptance suite.
"""

import numpy as np
import pytest

from plasmonqe import dynamics, spectral
from plasmonqe.materials import silver_germanium_default

# full-length runs: criterion configuration (t_max) and the dt cap that the
# grid-convergence gate of the acceptance suite justifies
T_MAX_FULL = 2000.0
DT_COARSE = 0.01


@pytest.fixture(scope="session")
def system_12():
    return silver_germanium_default(1.2)


@pytest.fixture(scope="session")
def system_20():
    return silver_germanium_default(2.0)


@pytest.fixture(scope="session")
def table_12(system_12):
    return spectral.tabulate_spectral_density(system_12)


@pytest.fixture(scope="session")
def table_20(system_20):
    return spectral.tabulate_spectral_density(system_20)


@pytest.fixture(scope="session")
def convergence_12(table_12):
    """dt-halving pair (0.01 vs 0.005) at dz = 1.2 nm over the full run."""
    return dynamics.grid_convergence_check(table_12, 1.2, T_MAX_FULL, DT_COARSE)


@pytest.fixture(scope="session")
def convergence_20(table_20):
    """dt-halving pair (0.01 vs 0.005) at dz = 2.0 nm over the full run."""
    return dynamics.grid_convergence_check(table_20, 1.2, T_MAX_FULL, DT_COARSE)


def _gated_trajectory(check):
    """dt = 0.01 is admitted only when the steady-window halving check passes."""
    chosen = check.coarse if check.late_max_abs_diff < 1e-4 else check.fine
    return dynamics.extract_rates(chosen)


@pytest.fixture(scope="session")
def traj_12(convergence_12):
    """Full bound-state-regime trajectory at the gated dt."""
    return _gated_trajectory(convergence_12)


@pytest.fixture(scope="session")
def traj_20(convergence_20):
    """Full decaying-regime trajectory at the gated dt."""
    return _gated_trajectory(convergence_20)


@pytest.fixture(scope="session")
def narrow_lorentzian_table():
    """Near-delta Lorentzian line: center 2 eV, weight 4 eV^2, width 1e-4 eV.

    Dense linear core out to +-60 widths, geometric tails covering [0.5, 3.5].
    """
    center, width, weight = 2.0, 1e-4, 4.0
    half = width / 2.0
    core = center + np.linspace(-60 * width, 60 * width, 1601)
    left = center - 60 * width - np.geomspace(width / 10, 1.494, 300)
    right = center + 60 * width + np.geomspace(width / 10, 1.494, 300)
    grid = np.unique(np.concatenate([left, core, right]))
    j = (weight / np.pi) * half / ((grid - center) ** 2 + half**2)
    return spectral.SpectralTable(grid, j)

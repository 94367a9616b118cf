"""Environment correlation (memory) kernel from a tabulated spectral density.

K(tau) = Int dw J(w) exp(-i w tau) over the table support.  J is piecewise
linear, so the transform is evaluated in closed form on every segment; there
is no sampling error from the oscillatory factor, and the kernel error is
purely the tabulation error of J.  Uniform tau grids use a phase-recursion
fast path; both paths agree to roundoff.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .spectral import SpectralTable


class KernelInvariantError(RuntimeError):
    """A tabulated kernel violated |K(tau)| <= K(0) or realness of K(0)."""


@dataclass
class KernelTable:
    """Complex kernel on a uniform tau >= 0 grid.

    K(-tau) = conj(K(tau)); only tau >= 0 is stored and consumers use the
    conjugation.  ``omega_max`` records the spectral support used to build
    the table so the dynamics solver can check its time step.
    """

    tau_grid: np.ndarray
    k_values: np.ndarray
    omega_max: float | None = None

    def __post_init__(self):
        tau = np.ascontiguousarray(np.asarray(self.tau_grid, dtype=float))
        k = np.ascontiguousarray(np.asarray(self.k_values, dtype=complex))
        if tau.ndim != 1 or tau.shape != k.shape or tau.size < 2:
            raise ValueError("tau_grid and k_values must be matching 1-d arrays")
        steps = np.diff(tau)
        if tau[0] != 0.0 or np.any(steps <= 0):
            raise ValueError("tau_grid must start at 0 and increase")
        if np.max(np.abs(steps - steps[0])) > 1e-9 * steps[0]:
            raise ValueError("tau_grid must be uniform")
        tau.flags.writeable = False
        k.flags.writeable = False
        object.__setattr__(self, "tau_grid", tau)
        object.__setattr__(self, "k_values", k)

    @property
    def dt(self) -> float:
        return float(self.tau_grid[1] - self.tau_grid[0])

    @property
    def k0(self) -> float:
        return float(self.k_values[0].real)

    def write_csv(self, path) -> None:
        with open(path, "w", encoding="utf-8") as fh:
            fh.write("tau_inv_ev,re_k,im_k\n")
            for t, k in zip(self.tau_grid, self.k_values):
                fh.write(f"{t:.12g},{k.real:.12g},{k.imag:.12g}\n")


def exponential_kernel(g_squared: float, omega_c: float, gamma_p: float):
    """Analytic kernel g^2 exp(-(i w_c + gamma_p/2) tau) of a full-line Lorentzian.

    This is the memory kernel equivalent to a damped mode at omega_c with
    linewidth gamma_p coupled at strength g; it serves as the closed-form
    oracle for both the Volterra solver and the pseudomode reduction.
    """
    rate = 1j * omega_c + 0.5 * gamma_p

    def k(tau):
        return g_squared * np.exp(-rate * np.asarray(tau, dtype=float))

    return k


def _phi0(z: np.ndarray) -> np.ndarray:
    """(e^z - 1)/z, series-protected near z = 0."""
    small = np.abs(z) < 1e-3
    zs = np.where(small, 0.0, z)
    with np.errstate(invalid="ignore", divide="ignore"):
        closed = (np.exp(zs) - 1.0) / np.where(small, 1.0, zs)
    series = 1.0 + z / 2.0 + z**2 / 6.0 + z**3 / 24.0 + z**4 / 120.0
    return np.where(small, series, closed)


def _phi1(z: np.ndarray) -> np.ndarray:
    """Int_0^1 v e^{z v} dv = (e^z (z - 1) + 1)/z^2, series-protected."""
    small = np.abs(z) < 1e-3
    zs = np.where(small, 1.0, z)
    with np.errstate(invalid="ignore", divide="ignore"):
        closed = (np.exp(zs) * (zs - 1.0) + 1.0) / zs**2
    series = 0.5 + z / 3.0 + z**2 / 8.0 + z**3 / 30.0 + z**4 / 144.0
    return np.where(small, series, closed)


def _segment_data(table: SpectralTable):
    w = table.omega_grid
    j = table.j_values
    h = np.diff(w)
    slope = np.diff(j) / h
    return w[:-1], j[:-1], h, slope


def _trapezoid_mass(table: SpectralTable) -> float:
    _, j1, h, slope = _segment_data(table)
    return float(np.sum(h * (j1 + 0.5 * slope * h)))


def memory_kernel(table: SpectralTable, tau):
    """K(tau) for scalar or array tau >= 0, segment-exact.

    On each linear segment the integral of (J1 + m (w - w1)) e^{-i w tau} is
    evaluated in closed form, so oscillations are handled without sampling.
    """
    tau_arr = np.atleast_1d(np.asarray(tau, dtype=float))
    if np.any(tau_arr < 0):
        raise ValueError("memory_kernel requires tau >= 0")
    w1, j1, h, slope = _segment_data(table)
    out = np.empty(tau_arr.shape, dtype=complex)
    mass = _trapezoid_mass(table)
    chunk = max(1, int(2e6 / max(h.size, 1)))
    for start in range(0, tau_arr.size, chunk):
        t = tau_arr[start:start + chunk, None]
        z = -1j * h[None, :] * t
        seg = np.exp(-1j * w1[None, :] * t) * h[None, :] * (
            j1[None, :] * _phi0(z) + slope[None, :] * h[None, :] * _phi1(z)
        )
        out[start:start + chunk] = seg.sum(axis=1)
    out[tau_arr == 0.0] = mass
    if np.ndim(tau) == 0:
        return complex(out[0])
    return out


def _node_coefficients(table: SpectralTable):
    """Node-weight vectors of the integrated-by-parts kernel representation.

    K(tau) = (i/tau) sum_j a_j e^{-i w_j tau} + (1/tau^2) sum_j b_j e^{-i w_j tau}
    with a carrying the boundary values of J and b the slope jumps.
    """
    w = table.omega_grid
    j = table.j_values
    slope = np.diff(j) / np.diff(w)
    a = np.zeros(w.size)
    a[0] = -j[0]
    a[-1] = j[-1]
    b = np.zeros(w.size)
    b[0] = -slope[0]
    b[-1] = slope[-1]
    b[1:-1] = slope[:-1] - slope[1:]
    return w, a, b


def _uniform_grid_kernel(table: SpectralTable, tau: np.ndarray) -> np.ndarray:
    """Fast segment-exact kernel on a uniform tau grid via phase recursion."""
    nodes, ca, cb = _node_coefficients(table)
    n_tau = tau.size
    dt = tau[1] - tau[0]
    sum_a = np.empty(n_tau, dtype=complex)
    sum_b = np.empty(n_tau, dtype=complex)
    q = np.exp(-1j * dt * nodes)
    row = np.exp(-1j * tau[0] * nodes)
    chunk = max(2, int(4e6 / nodes.size))
    for start in range(0, n_tau, chunk):
        rows = min(chunk, n_tau - start)
        phases = np.empty((rows, nodes.size), dtype=complex)
        phases[0] = row
        if rows > 1:
            phases[1:] = q
            np.cumprod(phases, axis=0, out=phases)
        sum_a[start:start + rows] = phases @ ca
        sum_b[start:start + rows] = phases @ cb
        row = phases[-1] * q
    out = np.empty(n_tau, dtype=complex)
    positive = tau > 0
    tp = tau[positive]
    out[positive] = 1j / tp * sum_a[positive] + sum_b[positive] / tp**2
    out[~positive] = _trapezoid_mass(table)
    return out


def validate_kernel_values(tau: np.ndarray, k: np.ndarray) -> None:
    """Enforce realness of K(0) and |K(tau)| <= K(0) up to roundoff."""
    k0 = k[0]
    if abs(k0.imag) > 1e-9 * max(abs(k0.real), 1e-300):
        raise KernelInvariantError(f"K(0) not real: {k0!r}")
    mags = np.abs(k)
    bad = mags > k0.real * (1.0 + 1e-12) + 1e-300
    if np.any(bad):
        t_bad = tau[bad][0]
        raise KernelInvariantError(
            f"|K(tau)| = {mags[bad][0]:.12e} exceeds K(0) = {k0.real:.12e} "
            f"at tau = {t_bad:.9g}"
        )


def tabulate_kernel(table: SpectralTable, t_max: float, dt: float) -> KernelTable:
    """Tabulate K on {0, dt, ..., >= t_max} and check its invariants.

    Raises KernelInvariantError if |K(tau)| exceeds K(0) beyond roundoff
    (impossible for a nonnegative J) or K(0) picks up an imaginary part.
    """
    if dt <= 0:
        raise ValueError("dt must be positive")
    if t_max < dt:
        raise ValueError("t_max must be at least dt")
    n = int(np.ceil(t_max / dt - 1e-9))
    tau = np.arange(n + 1) * dt
    k = _uniform_grid_kernel(table, tau)
    validate_kernel_values(tau, k)
    return KernelTable(tau, k, omega_max=table.omega_max)

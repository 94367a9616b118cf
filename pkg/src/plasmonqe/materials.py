"""Material parameters, unit conventions and the Drude permittivity model.

Unit system: hbar = 1, so energies, frequencies and rates share the eV scale,
times are measured in 1/eV and lengths in nm.  The only dimensional constant
that survives is hbar*c in eV*nm; the vacuum permittivity and the dipole
moment never appear on their own because they are absorbed into the free
spontaneous-emission rate gamma0.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

# hbar * c in eV nm; the only unit-conversion constant in the package.
HBAR_C_EV_NM = 197.3269804

# One inverse eV of time corresponds to this many femtoseconds (hbar = 1).
FEMTOSECONDS_PER_INV_EV = 0.658212


@dataclass(frozen=True)
class Constants:
    """Dimensional constants shared by every module (immutable)."""

    hbar_c: float = HBAR_C_EV_NM  # eV nm


@dataclass(frozen=True)
class DrudeMetal:
    """Drude metal: eps(w) = eps_inf - omega_p^2 / (w (w + i gamma_p))."""

    omega_p: float  # bulk plasma frequency, eV
    eps_inf: float  # high-frequency permittivity limit
    gamma_p: float  # Ohmic loss rate, eV

    def __post_init__(self):
        if self.omega_p <= 0:
            raise ValueError(f"omega_p must be > 0, got {self.omega_p}")
        if self.eps_inf < 1:
            raise ValueError(f"eps_inf must be >= 1, got {self.eps_inf}")
        if self.gamma_p < 0:
            raise ValueError(f"gamma_p must be >= 0, got {self.gamma_p}")


@dataclass(frozen=True)
class Dielectric:
    """Lossless, nondispersive, nonmagnetic host medium."""

    eps_d: float

    def __post_init__(self):
        if self.eps_d < 1:
            raise ValueError(f"eps_d must be >= 1, got {self.eps_d}")


@dataclass(frozen=True)
class Emitter:
    """Two-level emitter with its dipole normal to the interface.

    The dipole moment enters only through gamma0; it is never stored
    separately.
    """

    omega0: float   # transition frequency, eV
    gamma0: float   # free-space spontaneous emission rate, eV
    delta_z: float  # distance above the interface, nm

    def __post_init__(self):
        if self.omega0 <= 0:
            raise ValueError(f"omega0 must be > 0, got {self.omega0}")
        if self.gamma0 <= 0:
            raise ValueError(f"gamma0 must be > 0, got {self.gamma0}")
        if self.delta_z <= 0:
            raise ValueError(f"delta_z must be > 0, got {self.delta_z}")


@dataclass(frozen=True)
class MaterialSystem:
    """Complete emitter + interface parameter set.

    Immutable after construction; safe to share between workers.
    """

    metal: DrudeMetal
    dielectric: Dielectric
    emitter: Emitter
    constants: Constants = Constants()

    def with_delta_z(self, delta_z: float) -> "MaterialSystem":
        return replace(self, emitter=replace(self.emitter, delta_z=delta_z))

    def with_eps_d(self, eps_d: float) -> "MaterialSystem":
        return replace(self, dielectric=Dielectric(eps_d))

    def with_gamma0(self, gamma0: float) -> "MaterialSystem":
        return replace(self, emitter=replace(self.emitter, gamma0=gamma0))


def drude_permittivity(metal: DrudeMetal, omega):
    """Complex Drude permittivity at frequency ``omega`` (eV).

    Accepts scalars or arrays; every frequency must be positive.  The
    imaginary part is nonnegative whenever gamma_p >= 0.
    """
    w = np.asarray(omega, dtype=float)
    if np.any(w <= 0):
        raise ValueError("drude_permittivity requires omega > 0")
    eps = metal.eps_inf - metal.omega_p**2 / (w * (w + 1j * metal.gamma_p))
    if np.ndim(omega) == 0:
        return complex(eps)
    return eps


def spp_cutoff_frequency(metal: DrudeMetal, dielectric: Dielectric) -> float:
    """Surface-plasmon cutoff omega_c = omega_p / sqrt(eps_d + eps_inf) in eV."""
    return metal.omega_p / np.sqrt(dielectric.eps_d + metal.eps_inf)


def silver_germanium_default(delta_z: float = 1.2) -> MaterialSystem:
    """Silver/germanium reference system.

    Silver: omega_p = 9 eV, eps_inf = 5.7, gamma_p = 0.1 eV.  Germanium:
    eps_d = 25.  Emitter: omega0 = 1.2 eV, gamma0 = 1e-4 eV at ``delta_z`` nm.
    """
    return MaterialSystem(
        metal=DrudeMetal(omega_p=9.0, eps_inf=5.7, gamma_p=0.1),
        dielectric=Dielectric(eps_d=25.0),
        emitter=Emitter(omega0=1.2, gamma0=1e-4, delta_z=delta_z),
    )

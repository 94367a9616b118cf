"""Exact dissipative dynamics of a two-level emitter near a metal-dielectric interface.

The package computes the surface-plasmon-polariton spectral density of a
planar Drude-metal/dielectric interface, solves the resulting non-Markovian
amplitude equation, locates the emitter-SPP bound state responsible for
population trapping, and quantifies when the Lorentzian pseudomode picture
breaks down.  Units: hbar = 1, energies in eV, times in 1/eV, lengths in nm.
"""

from .materials import (
    Constants,
    Dielectric,
    DrudeMetal,
    Emitter,
    MaterialSystem,
    drude_permittivity,
    silver_germanium_default,
    spp_cutoff_frequency,
)

__all__ = [
    "Constants",
    "Dielectric",
    "DrudeMetal",
    "Emitter",
    "MaterialSystem",
    "drude_permittivity",
    "silver_germanium_default",
    "spp_cutoff_frequency",
]

__version__ = "0.1.0"

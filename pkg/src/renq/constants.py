"""Physical constants (SI), frozen to the CODATA values shipped with scipy.

All renq modules import from here rather than from scipy directly so the
numbers used across the package are guaranteed identical and read-only.
"""

from __future__ import annotations

from dataclasses import dataclass

import scipy.constants as _sc


@dataclass(frozen=True)
class PhysicalConstants:
    """Read-only bundle of the constants the package needs (SI units)."""

    mu0: float = _sc.mu_0                     # vacuum permeability (T m / A)
    mu_bohr: float = _sc.physical_constants["Bohr magneton"][0]      # J / T
    mu_nuclear: float = _sc.physical_constants["nuclear magneton"][0]  # J / T
    hbar: float = _sc.hbar                    # J s
    h_planck: float = _sc.h                   # J s
    speed_of_light: float = _sc.c             # m / s
    boltzmann: float = _sc.k                  # J / K


CONST = PhysicalConstants()

# Convenience aliases — these are plain floats, safe to import directly.
MU0 = CONST.mu0
MU_BOHR = CONST.mu_bohr
MU_NUCLEAR = CONST.mu_nuclear
HBAR = CONST.hbar
H_PLANCK = CONST.h_planck
SPEED_OF_LIGHT = CONST.speed_of_light

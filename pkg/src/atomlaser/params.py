"""System parameters and the standing-wave coupling profile.

Internal unit system: hbar = k_B = 1, and rates are quoted in units of the
cavity decay rate kappa (kappa = 1 by default).  Positions carry units of
the inverse wavenumber, so one wavelength is 2*pi/wavenumber.  The atomic
mass is fixed by the recoil frequency through m = wavenumber**2 / (2 * recoil),
which makes momentum and temperature scales follow directly from the rates.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np


@dataclass(frozen=True)
class SystemParams:
    """Rates and scales of the pumped atom-cavity system.

    Parameters
    ----------
    gamma : float
        Free-space spontaneous emission rate of the atom (loss).
    nu : float
        Incoherent pump rate into the excited state (gain).
    g : float
        Peak atom-cavity coupling; the position-dependent coupling is
        g * cos(wavenumber * x).
    delta : float
        Detuning between the atomic transition and the cavity resonance.
    kappa : float
        Cavity field decay rate; the default 1.0 fixes the unit of time.
    wavenumber : float
        Cavity-mode wavenumber; the default 1.0 fixes the unit of length.
    recoil : float
        Recoil frequency wavenumber**2 / (2 m); sets the atomic mass.
    """

    gamma: float
    nu: float
    g: float
    delta: float = 0.0
    kappa: float = 1.0
    wavenumber: float = 1.0
    recoil: float = 0.01

    def __post_init__(self):
        if self.gamma < 0 or self.nu < 0:
            raise ValueError("rates gamma and nu must be nonnegative")
        if self.g < 0:
            raise ValueError("coupling g must be nonnegative")
        if self.kappa <= 0:
            raise ValueError("cavity decay kappa must be positive")
        if self.wavenumber <= 0 or self.recoil <= 0:
            raise ValueError("wavenumber and recoil must be positive")

    @property
    def total_width(self):
        """Polarization decay rate kappa + gamma + nu."""
        return self.kappa + self.gamma + self.nu

    @property
    def atom_width(self):
        """Population relaxation rate gamma + nu."""
        return self.gamma + self.nu

    @property
    def wavelength(self):
        return 2.0 * math.pi / self.wavenumber

    @property
    def mass(self):
        return self.wavenumber**2 / (2.0 * self.recoil)

    @property
    def doppler_energy(self):
        """k_B T at the two-level Doppler scale, hbar * gamma."""
        return self.gamma

    @property
    def recoil_energy(self):
        """k_B T at the recoil scale, hbar * recoil frequency."""
        return self.recoil

    @property
    def doppler_momentum(self):
        """Momentum with kinetic energy ~ Doppler scale, sqrt(m hbar gamma)."""
        return math.sqrt(self.mass * self.gamma)

    def with_updates(self, **changes) -> "SystemParams":
        return replace(self, **changes)


def coupling(params: SystemParams, x):
    """Atom-cavity coupling at position x: g * cos(k x)."""
    return params.g * np.cos(params.wavenumber * np.asarray(x, dtype=float))


def grad_coupling(params: SystemParams, x):
    """Spatial derivative of the coupling: -g * k * sin(k x)."""
    k = params.wavenumber
    return -params.g * k * np.sin(k * np.asarray(x, dtype=float))

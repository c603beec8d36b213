"""Sampled time series shared by the deterministic and stochastic integrators."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np


@dataclass
class Trajectory:
    """Sampled atomic trajectory.

    Arrays are aligned sample-by-sample: t strictly increasing, x and p the
    atomic phase-space coordinates, photons the instantaneous intracavity
    photon number at the sampled position, and inversion the atomic inversion
    where the integrator tracks it (NaN otherwise).
    """

    t: np.ndarray
    x: np.ndarray
    p: np.ndarray
    photons: np.ndarray
    inversion: np.ndarray
    mode: str
    dt: float
    seed: int | None = None
    heating_flagged: bool = False
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        n = len(self.t)
        for name in ("x", "p", "photons", "inversion"):
            if len(getattr(self, name)) != n:
                raise ValueError(f"trajectory field {name} length mismatch")
        if n > 1 and not np.all(np.diff(self.t) > 0):
            raise ValueError("trajectory times must be strictly increasing")

    def __len__(self):
        return len(self.t)

    def kinetic_energy(self, mass: float) -> np.ndarray:
        return self.p**2 / (2.0 * mass)

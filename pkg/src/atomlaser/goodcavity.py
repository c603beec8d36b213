"""Closed-form temperature limit for a long-lived cavity mode.

When the cavity decay is much slower than every other rate (and spontaneous
emission is negligible), friction and diffusion expand to first order in
kappa and their ratio collapses to a two-parameter expression: the operating
point a = W/kappa (stimulated emission rate over cavity decay) and the
pumping ratio y = nu/delta.  This module provides that expression, its
minimum over the operating point, and a convergence check of the full
transport pipeline toward the limit.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.optimize import minimize_scalar

from .params import SystemParams
from . import motion


@dataclass(frozen=True)
class OperatingPoint:
    """Good-cavity operating point: a = W/kappa, y = nu/delta."""

    a: float
    y: float

    def __post_init__(self):
        if self.a <= 0 or self.y <= 0:
            raise ValueError("operating point requires a > 0 and y > 0")


def gc_temperature(op: OperatingPoint) -> float:
    """Equilibrium temperature in units of the cavity linewidth (hbar kappa).

    kT/(hbar kappa) = (2 a^2 + (a-1)^2 y^2) / (2 a y).  Equals 1/y at a = 1,
    so strong pumping beats the passive-cavity limit.
    """
    a, y = op.a, op.y
    return (2.0 * a**2 + (a - 1.0) ** 2 * y**2) / (2.0 * a * y)


def gc_min_temperature(y: float):
    """Minimum of gc_temperature over the operating point, and its argmin.

    kT_min/(hbar kappa) = sqrt(y^2 + 2) - y at a* = y / sqrt(y^2 + 2) < 1.
    Monotonically decreasing in y with limit 0.
    """
    if y <= 0:
        raise ValueError("pumping ratio y must be positive")
    root = math.sqrt(y**2 + 2.0)
    return root - y, y / root


def _family_params(kappa_over_nu: float, y: float, a: float, x_ref: float, kappa: float):
    """Member of the vanishing-kappa family with W(x_ref) = a*kappa, nu = y*delta."""
    nu = kappa / kappa_over_nu
    delta = nu / y
    Gam = kappa + nu
    u_ref = a * kappa * (Gam**2 + delta**2) / Gam
    g = math.sqrt(u_ref) / abs(math.cos(x_ref))
    return SystemParams(gamma=0.0, nu=nu, g=g, delta=delta, kappa=kappa)


def gc_convergence_check(
    y: float,
    a: float,
    ratios=(1e-1, 1e-2, 1e-3),
    gamma: float = 0.0,
    x_ref: float | None = None,
) -> np.ndarray:
    """Relative error of the full pipeline against the closed form.

    Walks down a family of parameter sets with kappa/nu in `ratios`, nu/delta
    and the operating point held fixed, and compares the pointwise transport
    temperature D(x_ref)/|beta(x_ref)| with gc_temperature.  The limit
    formula assumes no spontaneous emission, so gamma must be 0.  The
    comparison is pointwise (not position averaged) because the limit is
    derived from pointwise coefficients; any x_ref off a node or antinode
    gives the same ratio.  Converges for operating points away from the
    threshold a = 1, where the expansion in kappa is not uniform.
    """
    if gamma != 0.0:
        raise ValueError("the closed-form limit assumes gamma = 0")
    target = gc_temperature(OperatingPoint(a, y))
    if x_ref is None:
        x_ref = math.pi / 4.0  # an eighth of a wavelength at unit wavenumber
    errs = []
    for ratio in ratios:
        params = _family_params(ratio, y, a, x_ref, kappa=1.0)
        beta = motion.friction(params, x_ref)
        if beta >= 0:
            raise RuntimeError(
                f"no cooling at kappa/nu={ratio:g}; operating point outside regime"
            )
        diff = motion.diffusion_field(params, x_ref)
        temp = diff / abs(beta) / params.kappa
        errs.append(abs(temp / target - 1.0))
    return np.array(errs)


def minimize_temperature_numeric(y: float):
    """Golden-section minimization of gc_temperature; oracle for the argmin."""
    res = minimize_scalar(
        lambda a: gc_temperature(OperatingPoint(a, y)),
        bracket=(1e-3, 1.0, 10.0),
        method="golden",
        options={"xtol": 1e-13},
    )
    return float(res.fun), float(res.x)

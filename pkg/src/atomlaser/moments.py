"""Second-order-moment model of the pumped atom-cavity system.

The closed set of equations for the four quadratic observables

    photons   = <a' a>            (photon number, "N")
    excited   = <s+ s->           (upper-state population, "P")
    corr_re   = <a' s- + s+ a>    (in-phase field-dipole correlation)
    corr_im   = <(a' s- - s+ a)/i> (quadrature correlation, carries the force)

is linear once the inversion parameter Z = 2P - 1 appearing in one matrix
entry is treated as a constant; Z itself is then fixed self-consistently by
the pump-loss balance.  Because the determinant of the 4x4 system is affine
in Z, the self-consistency condition reduces to a quadratic, which this
module solves in closed form (with a damped fixed-point iteration kept as an
independent cross-check).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .params import SystemParams, coupling, grad_coupling
from .lamb import saturated_inversion


class NoPhysicalRootError(RuntimeError):
    """Raised when no steady-state inversion satisfies the physical filters."""


@dataclass
class MomentVector:
    """Value container for the four quadratic observables."""

    photons: float
    excited: float
    corr_re: float
    corr_im: float

    def as_array(self):
        return np.array([self.photons, self.excited, self.corr_re, self.corr_im])


@dataclass
class MomentSolution:
    """Self-consistent steady state of the moment model at position x.

    det4 is det(M)/4 of the system matrix at the self-consistent inversion;
    emission is the stimulated rate W = Gamma G^2/(Gamma^2 + delta^2).
    """

    x: float
    photons: float
    excited: float
    inversion: float
    emission: float
    det4: float
    corr_re: float
    corr_im: float

    def as_vector(self) -> MomentVector:
        return MomentVector(self.photons, self.excited, self.corr_re, self.corr_im)


def system_matrix(params: SystemParams, x: float, Z: float):
    """Linear system (M, v) for the moment vector at frozen inversion Z.

    d/dt (photons, excited, corr_re, corr_im) = M . vec + v.
    """
    if not -1.0 <= Z <= 1.0:
        raise ValueError("inversion parameter Z must lie in [-1, 1]")
    G = float(coupling(params, x))
    A = params.atom_width
    Gam = params.total_width
    M = np.array(
        [
            [-2.0 * params.kappa, 0.0, G, 0.0],
            [0.0, -2.0 * A, -G, 0.0],
            [2.0 * Z * G, 2.0 * G, -Gam, -params.delta],
            [0.0, 0.0, params.delta, -Gam],
        ]
    )
    v = np.array([0.0, 2.0 * params.nu, 0.0, 0.0])
    return M, v


def emission_rate(params: SystemParams, x):
    """Emission rate into the resonator, W = Gamma G^2 / (Gamma^2 + delta^2).

    Broader than the adiabatic form by the cavity linewidth; the two agree
    as kappa -> 0.
    """
    Gam = params.total_width
    G = coupling(params, x)
    return Gam * G**2 / (Gam**2 + params.delta**2)


def det4(params: SystemParams, u, Z):
    """det(M)/4 as a polynomial in u = G^2 and the inversion Z."""
    A = params.atom_width
    Gam = params.total_width
    band = Gam**2 + params.delta**2
    return params.kappa * A * band + Gam * u * (params.kappa - A * Z)


def _quad_coeffs(params: SystemParams, u):
    """Coefficients (a2, a1, a0) of the self-consistency quadratic in Z.

    Substituting N = nu Gamma u / det4(Z) and P = (1+Z)/2 into the balance
    nu(1-P) = gamma P + kappa N and clearing det4 gives
    a2 Z^2 + a1 Z + a0 = 0 with det4 affine in Z.
    """
    A = params.atom_width
    Gam = params.total_width
    kappa = params.kappa
    inv = params.nu - params.gamma
    d1 = A * Gam * u                                   # -d(det4)/dZ
    d0 = kappa * (A * (Gam**2 + params.delta**2) + Gam * u)  # det4 at Z=0
    a2 = A * d1
    a1 = -(inv * d1 + A * d0)
    a0 = inv * d0 - 2.0 * kappa * params.nu * Gam * u
    return a2, a1, a0


def solve_inversion(params: SystemParams, u):
    """Self-consistent inversion Z for coupling intensity u = G^2.

    Solves the quadratic with the numerically stable form and selects the
    physical root: Z in [-1, 1], det4 > 0 (hence photon number >= 0), and,
    if both roots qualify, the one closer to the uncoupled inversion
    (nu-gamma)/(nu+gamma) so the branch connects continuously to G -> 0.
    Vectorized over u.
    """
    u_arr = np.asarray(u, dtype=float)
    scalar = u_arr.ndim == 0
    u_arr = np.atleast_1d(u_arr)
    z0 = saturated_inversion(params)

    a2, a1, a0 = _quad_coeffs(params, u_arr)
    disc = a1**2 - 4.0 * a2 * a0
    disc = np.where(disc < 0, np.nan, disc)
    sq = np.sqrt(disc)
    q = -0.5 * (a1 + np.where(a1 >= 0, sq, -sq))
    with np.errstate(divide="ignore", invalid="ignore"):
        r1 = np.where(a2 != 0, q / np.where(a2 != 0, a2, 1.0), np.nan)
        r2 = np.where(q != 0, a0 / np.where(q != 0, q, 1.0), np.nan)

    tol = 1e-12
    best = np.full_like(u_arr, np.nan)
    best_dist = np.full_like(u_arr, np.inf)
    for r in (r1, r2):
        ok = np.isfinite(r) & (np.abs(r) <= 1.0 + tol)
        ok &= det4(params, u_arr, np.where(ok, r, 0.0)) > 0
        dist = np.abs(r - z0)
        take = ok & (dist < best_dist)
        best = np.where(take, r, best)
        best_dist = np.where(take, dist, best_dist)

    # decoupled positions: the quadratic degenerates to the linear branch
    best = np.where(u_arr == 0.0, z0, best)
    if np.any(~np.isfinite(best)):
        raise NoPhysicalRootError(
            "no steady-state inversion in [-1, 1] with positive det4"
        )
    best = np.clip(best, -1.0, 1.0)
    if scalar:
        return float(best[0])
    return best


def inversion_gradient_u(params: SystemParams, u, Z):
    """dZ/du along the physical branch, by implicit differentiation.

    With Q(Z, u) = 0 the self-consistency quadratic, dZ/du = -Q_u / Q_Z.
    """
    A = params.atom_width
    Gam = params.total_width
    kappa = params.kappa
    inv = params.nu - params.gamma
    q_u = Gam * (A**2 * Z**2 - A * (inv + kappa) * Z - kappa * (params.nu + params.gamma))
    a2, a1, _ = _quad_coeffs(params, u)
    q_z = 2.0 * a2 * Z + a1
    return -q_u / q_z


def solve_self_consistent(params: SystemParams, x: float) -> MomentSolution:
    """Full steady state of the moment model at position x.

    Cross-moments follow from the explicit inverse of the linear system:
    photons = nu Gamma u / det4, corr_re = 2 kappa nu Gamma G / det4,
    corr_im = 2 kappa nu G delta / det4.
    """
    G = float(coupling(params, x))
    u = G * G
    Z = solve_inversion(params, u)
    D = det4(params, u, Z)
    Gam = params.total_width
    nu = params.nu
    photons = nu * Gam * u / D
    excited = 0.5 * (1.0 + Z)
    corr_re = 2.0 * params.kappa * nu * Gam * G / D
    corr_im = 2.0 * params.kappa * nu * G * params.delta / D
    band = Gam**2 + params.delta**2
    return MomentSolution(
        x=float(x),
        photons=photons,
        excited=excited,
        inversion=Z,
        emission=Gam * u / band,
        det4=D,
        corr_re=corr_re,
        corr_im=corr_im,
    )


def solve_fixed_point(
    params: SystemParams,
    x: float,
    tol: float = 1e-12,
    max_iter: int = 20000,
    damping: float = 0.5,
):
    """Inversion by damped fixed-point iteration Z <- (1-d) Z + d Znew.

    Independent of the quadratic solver: each sweep recomputes N from the
    current Z and maps it through the pump-loss balance.  Used as a
    cross-check oracle; returns the converged Z.
    """
    G = float(coupling(params, x))
    u = G * G
    A = params.atom_width
    if A == 0:
        return 0.0
    Gam = params.total_width
    Z = saturated_inversion(params)
    for _ in range(max_iter):
        D = det4(params, u, Z)
        if D <= 0:
            # overshot the stable branch; pull back toward the dark value
            Z = 0.5 * (Z + saturated_inversion(params))
            continue
        N = params.nu * Gam * u / D
        P = (params.nu - params.kappa * N) / A
        Z_new = 2.0 * P - 1.0
        Z_next = (1.0 - damping) * Z + damping * Z_new
        if abs(Z_next - Z) < tol:
            return Z_next
        Z = Z_next
    raise NoPhysicalRootError(f"fixed-point iteration did not converge at x={x}")


def rate_equation_rhs(N: float, P: float, Z: float, params: SystemParams, x: float):
    """Quantum rate equations for photon number and excited population.

    dN/dt = -2(kappa - Z W) N + 2 W P
    dP/dt = -2(gamma + W + nu) P - 2 Z W N + 2 nu
    The self-consistent MomentSolution is their exact fixed point; for an
    inverted atom (Z > 0) the photon relaxation rate 2(kappa - Z W) drops
    below the bare cavity linewidth.
    """
    W = float(emission_rate(params, x))
    dN = -2.0 * (params.kappa - Z * W) * N + 2.0 * W * P
    dP = -2.0 * (params.gamma + W + params.nu) * P - 2.0 * Z * W * N + 2.0 * params.nu
    return dN, dP


def mean_force(params: SystemParams, x):
    """Steady-state dipole force 2 kappa nu delta G (grad G) / det4.

    Odd in delta, zero at nodes and antinodes, nonzero for any displacement
    from a node (the moment model has spontaneous seeding, unlike the
    thresholded c-number model).  Vectorized over x.
    """
    x_arr = np.asarray(x, dtype=float)
    G = coupling(params, x_arr)
    dG = grad_coupling(params, x_arr)
    u = G * G
    Z = solve_inversion(params, u)
    D = det4(params, u, Z)
    F = 2.0 * params.kappa * params.nu * params.delta * G * dG / D
    if np.ndim(x) == 0:
        return float(F)
    return F

"""Velocity expansion of the moment model: friction, diffusion, temperature.

For a slowly moving atom the moment vector is expanded to first order in the
velocity, X = X0(x) + v X1(x).  The zeroth order reproduces the steady state
of module ``moments``; the first order carries the friction force through the
quadrature correlation component.  Momentum diffusion has two independent
computations: a closed-form expression, and an assembly from the white-noise
covariance of the underlying input noise projected onto the force observable.
Their agreement is a structural self-test of the whole chain and is exercised
by the test suite.

Sign conventions: the velocity-linear force is written F = F0 + beta*v, so
cooling requires beta < 0.  The equilibrium temperature follows from the
Einstein relation kT = D_total / |beta| (position-averaged separately), which
is the dimensionally consistent form for momentum diffusion D and friction
coefficient beta.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.integrate import quad, simpson

from .params import SystemParams, coupling, grad_coupling
from . import lamb as _lamb
from .moments import (
    MomentSolution,
    MomentVector,
    det4,
    inversion_gradient_u,
    mean_force,
    solve_inversion,
    solve_self_consistent,
    system_matrix,
)


@dataclass
class MotionCoefficients:
    """Transport coefficients of the moving atom at position x."""

    x: float
    force: float
    potential: float
    friction: float
    diffusion_field: float
    diffusion_recoil: float


@dataclass
class EquilibriumSummary:
    """Position-averaged equilibrium picture.

    kT is NaN (and cooling False) when the averaged friction does not damp;
    kinetic is kT/2 in one dimension, ratio is kinetic/depth (NaN for a flat
    potential).
    """

    beta_avg: float
    diffusion_avg: float
    kT: float
    depth: float
    kinetic: float
    ratio: float
    cooling: bool


def inversion_gradient(params: SystemParams, x):
    """Spatial derivative of the self-consistent inversion, dZ/dx.

    Chain rule through u = G^2: dZ/dx = (dZ/du) * 2 G grad(G), with dZ/du
    from implicit differentiation of the self-consistency quadratic.
    """
    x_arr = np.asarray(x, dtype=float)
    G = coupling(params, x_arr)
    dG = grad_coupling(params, x_arr)
    u = G * G
    Z = solve_inversion(params, u)
    dZdu = inversion_gradient_u(params, u, Z)
    out = dZdu * 2.0 * G * dG
    if np.ndim(x) == 0:
        return float(out)
    return out


def first_order_response(params: SystemParams, x: float) -> MomentVector:
    """Velocity-linear correction X1 of the moment vector, matrix route.

    Solves M X1 = grad(X0) with grad(X0) obtained from grad(M) and X0 by two
    linear solves; independent of the closed-form friction expression except
    for the shared inversion gradient.
    """
    sol = solve_self_consistent(params, x)
    M, v = system_matrix(params, x, sol.inversion)
    x0 = np.linalg.solve(M, -v)

    G = float(coupling(params, x))
    dG = float(grad_coupling(params, x))
    dZ = float(inversion_gradient(params, x))
    grad_M = np.zeros((4, 4))
    grad_M[0, 2] = dG
    grad_M[1, 2] = -dG
    grad_M[2, 0] = 2.0 * (sol.inversion * dG + dZ * G)
    grad_M[2, 1] = 2.0 * dG
    grad_x0 = np.linalg.solve(M, -grad_M @ x0)
    x1 = np.linalg.solve(M, grad_x0)
    return MomentVector(*x1)


def friction(params: SystemParams, x):
    """Velocity-linear force coefficient beta(x), closed form.

    Polynomial in (G, Z, grad G, grad Z) over det4^3; agrees with
    (grad G) * corr_im component of first_order_response.  Vectorized.
    """
    x_arr = np.asarray(x, dtype=float)
    G = coupling(params, x_arr)
    dG = grad_coupling(params, x_arr)
    u = G * G
    Z = solve_inversion(params, u)
    dZ = inversion_gradient_u(params, u, Z) * 2.0 * G * dG

    kappa = params.kappa
    A = params.atom_width
    Gam = params.total_width
    band = Gam**2 + params.delta**2
    D = det4(params, u, Z)
    cz = kappa - A * Z

    z_term = -(G**3) * Gam * (
        4.0 * kappa**2 * A**2 * Gam + u * (A - kappa) * (kappa**2 + A**2 * Z)
    ) * dZ
    g_term = 2.0 * kappa * (
        band * (u * (kappa**3 - A**3 * Z) - 2.0 * kappa**2 * A**2 * Gam)
        + Gam * u**2 * cz**2
        + 2.0 * kappa * A * Gam**2 * u * cz
    ) * dG
    beta = params.nu * params.delta * dG * (z_term + g_term) / D**3
    if np.ndim(x) == 0:
        return float(beta)
    return beta


def friction_from_response(params: SystemParams, x: float) -> float:
    """beta via the matrix route, (grad G) times the X1 quadrature component."""
    return float(grad_coupling(params, x)) * first_order_response(params, x).corr_im


def noise_covariance(params: SystemParams, sol: MomentSolution) -> np.ndarray:
    """White-noise covariance of the input fluctuations at a steady state.

    Entry (i, j) is the delta-correlation strength between the noise driving
    moment i and moment j, with cross correlations (given as anticommutators)
    halved symmetrically onto the off-diagonal entries.
    """
    N = sol.photons
    P = sol.excited
    kappa, gamma, nu = params.kappa, params.gamma, params.nu
    diag_corr = 2.0 * kappa * P + 2.0 * gamma * N + 2.0 * nu * (1.0 + N)
    S = np.zeros((4, 4))
    S[0, 0] = 2.0 * kappa * N
    S[1, 1] = 2.0 * gamma * P + 2.0 * nu * (1.0 - P)
    S[2, 2] = diag_corr
    S[3, 3] = diag_corr
    S[0, 2] = S[2, 0] = kappa * sol.corr_re
    S[0, 3] = S[3, 0] = kappa * sol.corr_im
    S[1, 2] = S[2, 1] = (gamma - nu) * sol.corr_re
    S[1, 3] = S[3, 1] = (gamma - nu) * sol.corr_im
    return S


def diffusion_field(params: SystemParams, x):
    """Momentum diffusion from field fluctuations, closed form.

    The printed form carries a kappa/W factor that diverges at nodes while
    its G^2 prefactor vanishes; here the product is cleared into a polynomial
    so node values are exact (and generally nonzero).  Vectorized.
    """
    x_arr = np.asarray(x, dtype=float)
    G = coupling(params, x_arr)
    dG = grad_coupling(params, x_arr)
    u = G * G
    Z = solve_inversion(params, u)

    kappa = params.kappa
    A = params.atom_width
    Gam = params.total_width
    d2 = params.delta**2
    band = Gam**2 + d2
    D = det4(params, u, Z)
    cz = kappa - A * Z
    core = kappa * A * Gam + u * cz

    term1 = 2.0 * kappa**2 * d2 * (params.gamma - params.nu + A * Z) * (
        2.0 * kappa * A * Gam + u * cz
    ) * u
    term2 = Gam**2 * (kappa**2 * A**2 * d2 + core**2) * (
        u * (1.0 - Z) + kappa * band / Gam
    )
    term3 = kappa * d2 * (
        Gam * u**2 * (kappa**2 + A**2 * Z**2 - 2.0 * kappa * params.gamma * Z)
        + 2.0 * kappa**2 * params.gamma * u * band
    )
    diff = params.nu * dG**2 * (term1 + term2 + term3) / D**3
    if np.ndim(x) == 0:
        return float(diff)
    return diff


def diffusion_from_noise(params: SystemParams, x: float) -> float:
    """Momentum diffusion assembled from the noise covariance, oracle route.

    Quasi-statically the moment fluctuations follow the input noise through
    -M^{-1}; projecting onto the force observable (grad G times the
    quadrature component) gives 2 D = (grad G)^2 c.S.c with c the negated
    quadrature row of M^{-1}.
    """
    sol = solve_self_consistent(params, x)
    M, _ = system_matrix(params, x, sol.inversion)
    e_quad = np.array([0.0, 0.0, 0.0, 1.0])
    c = -np.linalg.solve(M.T, e_quad)
    S = noise_covariance(params, sol)
    dG = float(grad_coupling(params, x))
    return 0.5 * dG**2 * float(c @ S @ c)


def diffusion_recoil(params: SystemParams, x, geometry: float = 1.0):
    """Recoil diffusion from spontaneous emission, (hbar k)^2 gamma P(x).

    geometry scales the projection of the dipole emission pattern on the
    cavity axis; 1 is the conservative full-recoil choice.
    """
    x_arr = np.asarray(x, dtype=float)
    G = coupling(params, x_arr)
    Z = solve_inversion(params, G * G)
    P = 0.5 * (1.0 + Z)
    out = geometry * params.wavenumber**2 * params.gamma * P
    if np.ndim(x) == 0:
        return float(out)
    return out


def _force_scalar(params: SystemParams, x: float, model: str) -> float:
    if model == "moments":
        return float(mean_force(params, x))
    if model == "lamb":
        return float(_lamb.force_lamb(params, x))
    raise ValueError(f"unknown force model {model!r}")


def potential(params: SystemParams, x, model: str = "moments"):
    """Optical potential U(x) = -integral of the mean force from the antinode.

    The force is an exact differential over a period (it is a function of
    G^2 times the gradient of G^2), so U is single-valued, half-wavelength
    periodic, and even about nodes and antinodes; those symmetries reduce
    every evaluation to a quadrature on [0, lambda/4].  Gauge U(0) = 0.
    """
    half = 0.5 * params.wavelength
    quarter = 0.25 * params.wavelength

    def one(xi: float) -> float:
        r = math.fmod(abs(xi), half)
        if r > quarter:
            r = half - r
        if r == 0.0:
            return 0.0
        val, _ = quad(
            lambda s: _force_scalar(params, s, model), 0.0, r,
            epsabs=1e-12, epsrel=1e-10, limit=200,
        )
        return -val

    if np.ndim(x) == 0:
        return one(float(x))
    return np.array([one(float(xi)) for xi in np.asarray(x, dtype=float)])


def potential_depth(params: SystemParams, model: str = "moments") -> float:
    """Peak-to-peak depth of the optical potential over one period."""
    return abs(float(potential(params, 0.25 * params.wavelength, model=model)))


def position_average(fn, params: SystemParams, npoints: int = 513) -> float:
    """Uniform average of a half-wavelength-periodic function over one period.

    Composite Simpson on npoints samples of [0, lambda/2]; fn may return a
    scalar constant or an array matching its input.
    """
    if npoints < 3:
        raise ValueError("npoints must be at least 3")
    xs = np.linspace(0.0, 0.5 * params.wavelength, npoints)
    ys = np.broadcast_to(np.asarray(fn(xs), dtype=float), xs.shape)
    return float(simpson(ys, x=xs) / (0.5 * params.wavelength))


def motion_coefficients(
    params: SystemParams,
    x: float,
    model: str = "moments",
    recoil_geometry: float = 1.0,
) -> MotionCoefficients:
    """All transport coefficients at one position."""
    return MotionCoefficients(
        x=float(x),
        force=_force_scalar(params, x, model),
        potential=float(potential(params, x, model=model)),
        friction=float(friction(params, x)),
        diffusion_field=float(diffusion_field(params, x)),
        diffusion_recoil=float(diffusion_recoil(params, x, geometry=recoil_geometry)),
    )


def equilibrium_temperature(
    params: SystemParams,
    npoints: int = 513,
    recoil_geometry: float = 1.0,
) -> EquilibriumSummary:
    """Einstein-relation equilibrium summary, averaged over one period.

    Friction and total diffusion are averaged separately; the temperature is
    their ratio, defined only in the cooling case beta_avg < 0.  Heating
    (beta_avg >= 0) is reported with kT = NaN and cooling = False.
    """
    beta_avg = position_average(lambda s: friction(params, s), params, npoints)
    diff_avg = position_average(
        lambda s: diffusion_field(params, s)
        + diffusion_recoil(params, s, geometry=recoil_geometry),
        params,
        npoints,
    )
    depth = potential_depth(params)
    cooling = beta_avg < 0.0
    kT = diff_avg / abs(beta_avg) if cooling else math.nan
    kinetic = 0.5 * kT if cooling else math.nan
    ratio = kinetic / depth if cooling and depth > 0.0 else math.nan
    return EquilibriumSummary(
        beta_avg=beta_avg,
        diffusion_avg=diff_avg,
        kT=kT,
        depth=depth,
        kinetic=kinetic,
        ratio=ratio,
        cooling=cooling,
    )

"""Factorized c-number model of the pumped atom-cavity system.

All operator products are replaced by products of expectation values, leaving
three coupled complex/real variables: the field amplitude alpha, the atomic
polarization s, and the inversion z.  The module provides the right-hand side
of that ODE system, the analytic steady state with its lasing threshold, the
steady-state dipole force, and a deterministic integrator that couples the
internal dynamics to the atomic center-of-mass motion.

Two notions of "steady state" appear.  ``lamb_steady_state`` eliminates the
polarization adiabatically (the textbook route; its inversion is kappa/W with
W the stimulated emission rate) and is exact at delta = 0.  For delta != 0 the
true attractor of the ODE is a uniformly rotating solution whose frequency is
pulled between the cavity and atomic resonances; ``rotating_steady_state``
returns it in closed form.  The two agree to O(kappa/(gamma+nu)).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.integrate import solve_ivp

from .params import SystemParams, coupling, grad_coupling
from .trajectory import Trajectory


@dataclass
class LambState:
    """Instantaneous internal state: field alpha, polarization s, inversion z."""

    alpha: complex
    s: complex
    z: float

    def as_array(self):
        return np.array(
            [self.alpha.real, self.alpha.imag, self.s.real, self.s.imag, self.z]
        )

    @staticmethod
    def from_array(y) -> "LambState":
        return LambState(complex(y[0], y[1]), complex(y[2], y[3]), float(y[4]))


@dataclass
class LambSteady:
    """Analytic steady state at fixed position.

    photons is |alpha|^2; the phase gauge puts alpha on the nonnegative real
    axis.  Below threshold alpha = s = 0 and the inversion saturates at the
    pump-set value (nu - gamma)/(nu + gamma).
    """

    alpha: complex
    s: complex
    z: float
    photons: float
    above_threshold: bool


@dataclass
class RotatingSteady:
    """Exact attractor of the c-number ODEs at fixed position.

    For delta != 0 the asymptotic solution is not a fixed point: alpha and s
    rotate rigidly at pull_rate = kappa*delta/Gamma while |alpha|, |s|, z stay
    constant.  Amplitudes are reported at the phase where alpha is real >= 0.
    """

    alpha: complex
    s: complex
    z: float
    photons: float
    pull_rate: float
    above_threshold: bool


def lamb_rhs(state: LambState, params: SystemParams, x: float) -> LambState:
    """Time derivative of the factorized model at fixed position x."""
    G = float(coupling(params, x))
    a, s, z = state.alpha, state.s, state.z
    da = -params.kappa * a + G * s
    ds = (1j * params.delta - params.atom_width) * s + G * z * a
    dz = (
        -2.0 * params.atom_width * z
        - 4.0 * G * (a.conjugate() * s).real
        + 2.0 * (params.nu - params.gamma)
    )
    return LambState(da, ds, dz)


def threshold_coupling(params: SystemParams):
    """Coupling above which the adiabatic steady state lases.

    Returns None when nu <= gamma: without net inversion the model has no
    lasing solution at any coupling.
    """
    inv = params.nu - params.gamma
    if inv <= 0:
        return None
    A = params.atom_width
    return math.sqrt(params.kappa * (A**2 + params.delta**2) / inv)


def threshold_coupling_exact(params: SystemParams):
    """Threshold of the rotating (non-adiabatic) steady state; None if nu <= gamma."""
    inv = params.nu - params.gamma
    if inv <= 0:
        return None
    A = params.atom_width
    Gam = params.total_width
    return (A / Gam) * math.sqrt(params.kappa * (Gam**2 + params.delta**2) / inv)


def emission_rate_lamb(params: SystemParams, x):
    """Stimulated emission rate into the cavity mode, adiabatic form.

    W = (gamma+nu) G^2 / ((gamma+nu)^2 + delta^2); a Lorentzian in the
    detuning with the atomic linewidth.
    """
    A = params.atom_width
    G = coupling(params, x)
    return A * G**2 / (A**2 + params.delta**2)


def saturated_inversion(params: SystemParams):
    """Inversion of the uncoupled pumped atom, (nu-gamma)/(nu+gamma)."""
    A = params.atom_width
    if A == 0:
        return 0.0
    return (params.nu - params.gamma) / A


def lamb_steady_state(params: SystemParams, x: float) -> LambSteady:
    """Adiabatic steady state at fixed position.

    Above threshold the inversion clamps to kappa/W and the photon number
    follows from the pump-loss balance nu(1-P) = gamma P + kappa N.  At or
    below threshold (|G| <= G_th) the dark branch is returned; the branches
    meet continuously at threshold.
    """
    G = float(coupling(params, x))
    g_th = threshold_coupling(params)
    if g_th is None or abs(G) <= g_th:
        return LambSteady(0j, 0j, saturated_inversion(params), 0.0, False)
    A = params.atom_width
    W = A * G**2 / (A**2 + params.delta**2)
    z = params.kappa / W
    photons = ((params.nu - params.gamma) - A * z) / (2.0 * params.kappa)
    alpha = complex(math.sqrt(photons), 0.0)
    s = G * z * alpha / complex(A, -params.delta)
    return LambSteady(alpha, s, z, photons, True)


def rotating_steady_state(params: SystemParams, x: float) -> RotatingSteady:
    """Exact asymptotic solution of the c-number ODEs at fixed position.

    The attractor rotates at the pulled frequency omega = kappa*delta/Gamma;
    in the co-rotating frame it is a genuine fixed point.  Used to verify
    long-time integrations of lamb_rhs at any detuning.
    """
    G = float(coupling(params, x))
    A = params.atom_width
    Gam = params.total_width
    omega = params.kappa * params.delta / Gam
    g_th = threshold_coupling_exact(params)
    if g_th is None or abs(G) <= g_th:
        return RotatingSteady(0j, 0j, saturated_inversion(params), 0.0, omega, False)
    z = params.kappa * A * (Gam**2 + params.delta**2) / (G**2 * Gam**2)
    photons = ((params.nu - params.gamma) - A * z) / (2.0 * params.kappa)
    alpha = complex(math.sqrt(photons), 0.0)
    s = complex(params.kappa, omega) * alpha / G
    return RotatingSteady(alpha, s, z, photons, omega, True)


def force_lamb(params: SystemParams, x):
    """Steady-state dipole force of the adiabatic solution.

    F = (2 kappa delta / (gamma+nu)) * (grad G / G) * N.  Zero below
    threshold; N vanishes fast enough toward the threshold position that the
    force is continuous, and nodes/antinodes give exactly zero.  Odd in delta.
    Accepts scalar or array x.
    """
    x_arr = np.asarray(x, dtype=float)
    G = coupling(params, x_arr)
    dG = grad_coupling(params, x_arr)
    g_th = threshold_coupling(params)
    A = params.atom_width

    out = np.zeros_like(np.broadcast_to(G, np.shape(G)), dtype=float)
    if g_th is not None:
        above = np.abs(G) > g_th
        if np.any(above):
            Ga = np.where(above, G, 1.0)  # placeholder off-branch, masked out
            W = A * Ga**2 / (A**2 + params.delta**2)
            z = params.kappa / W
            photons = ((params.nu - params.gamma) - A * z) / (2.0 * params.kappa)
            F = (2.0 * params.kappa * params.delta / A) * (dG / Ga) * photons
            out = np.where(above, F, 0.0)
    if np.ndim(x) == 0:
        return float(out)
    return out


def continuity_residual(P: float, N: float, params: SystemParams):
    """Pump-loss balance residual nu(1-P) - gamma P - kappa N.

    Vanishes at any steady state of any model in this package, factorized
    or not; useful as a cross-model invariant.
    """
    return params.nu * (1.0 - P) - params.gamma * P - params.kappa * N


def integrate_internal(
    params: SystemParams,
    x: float,
    init: LambState,
    t_end: float,
    rtol: float = 1e-9,
    atol: float = 1e-9,
):
    """Adaptive high-order integration of lamb_rhs at fixed position.

    Used for steady-state verification, not for trajectory production.
    Returns the final LambState.
    """
    G = float(coupling(params, x))
    kappa, A = params.kappa, params.atom_width
    delta, drive = params.delta, 2.0 * (params.nu - params.gamma)

    def rhs(t, y):
        a = complex(y[0], y[1])
        s = complex(y[2], y[3])
        z = y[4]
        da = -kappa * a + G * s
        ds = (1j * delta - A) * s + G * z * a
        dz = -2.0 * A * z - 4.0 * G * (a.conjugate() * s).real + drive
        return [da.real, da.imag, ds.real, ds.imag, dz]

    sol = solve_ivp(
        rhs, (0.0, t_end), init.as_array(), method="DOP853", rtol=rtol, atol=atol
    )
    if not sol.success:
        raise RuntimeError(f"internal-state integration failed: {sol.message}")
    return LambState.from_array(sol.y[:, -1])


def instantaneous_force(state: LambState, params: SystemParams, x: float) -> float:
    """Dipole force for the instantaneous (generally non-steady) field.

    The Hermitian force observable is (grad G) times the out-of-phase
    field-polarization correlation; its c-number image is
    (grad G) * (-i)(alpha* s - s* alpha) = 2 (grad G) Im(alpha* s).
    Reduces to force_lamb when evaluated on the steady state.
    """
    dG = float(grad_coupling(params, x))
    return 2.0 * dG * (state.alpha.conjugate() * state.s).imag


def stability_limit(params: SystemParams) -> float:
    """Largest dt accepted by the fixed-step integrators."""
    fastest = max(
        params.total_width,
        2.0 * params.kappa,
        2.0 * params.atom_width,
        abs(params.delta),
    )
    return 0.1 / fastest


def integrate_coupled(
    params: SystemParams,
    init,
    dt: float,
    t_end: float,
    sample_every: int = 1,
) -> Trajectory:
    """Deterministic coupled integration of internal state and atomic motion.

    init is (x0, p0, LambState) or (x0, p0) with the internal state seeded
    from the rotating steady state at x0 (tiny field seed below threshold so
    lasing can start).  Fixed-step RK4 for reproducibility; no noise.

    The momentum couples to the instantaneous force, not the steady-state
    force, so the finite response time of the field (the cooling mechanism)
    is retained.
    """
    if dt <= 0 or t_end <= 0:
        raise ValueError("dt and t_end must be positive")
    dt_max = stability_limit(params)
    if dt > dt_max:
        raise ValueError(
            f"dt={dt:g} exceeds stability guard; use dt <= {dt_max:.3g}"
        )
    if sample_every < 1:
        raise ValueError("sample_every must be >= 1")

    if len(init) == 3:
        x0, p0, state0 = init
    else:
        x0, p0 = init
        rot = rotating_steady_state(params, x0)
        if rot.above_threshold:
            state0 = LambState(rot.alpha, rot.s, rot.z)
        else:
            state0 = LambState(1e-6 + 0j, 0j, rot.z)

    g, k = params.g, params.wavenumber
    kappa, A = params.kappa, params.atom_width
    idelta = 1j * params.delta
    drive = 2.0 * (params.nu - params.gamma)
    inv_m = 1.0 / params.mass

    def rhs(a, s, z, x, p):
        c = math.cos(k * x)
        G = g * c
        dG = -g * k * math.sin(k * x)
        da = -kappa * a + G * s
        ds = (idelta - A) * s + G * z * a
        w = a.conjugate() * s
        dz = -2.0 * A * z - 4.0 * G * w.real + drive
        return da, ds, dz, p * inv_m, 2.0 * dG * w.imag

    n_steps = int(round(t_end / dt))
    n_samples = n_steps // sample_every + 1
    ts = np.empty(n_samples)
    xs = np.empty(n_samples)
    ps = np.empty(n_samples)
    ns = np.empty(n_samples)
    zs = np.empty(n_samples)

    a, s, z = state0.alpha, state0.s, state0.z
    x, p = float(x0), float(p0)
    half = 0.5 * dt
    sixth = dt / 6.0
    isample = 0
    for istep in range(n_steps + 1):
        if istep % sample_every == 0 and isample < n_samples:
            ts[isample] = istep * dt
            xs[isample] = x
            ps[isample] = p
            ns[isample] = abs(a) ** 2
            zs[isample] = z
            isample += 1
        if istep == n_steps:
            break
        k1 = rhs(a, s, z, x, p)
        k2 = rhs(
            a + half * k1[0], s + half * k1[1], z + half * k1[2],
            x + half * k1[3], p + half * k1[4],
        )
        k3 = rhs(
            a + half * k2[0], s + half * k2[1], z + half * k2[2],
            x + half * k2[3], p + half * k2[4],
        )
        k4 = rhs(
            a + dt * k3[0], s + dt * k3[1], z + dt * k3[2],
            x + dt * k3[3], p + dt * k3[4],
        )
        a += sixth * (k1[0] + 2.0 * (k2[0] + k3[0]) + k4[0])
        s += sixth * (k1[1] + 2.0 * (k2[1] + k3[1]) + k4[1])
        z += sixth * (k1[2] + 2.0 * (k2[2] + k3[2]) + k4[2])
        x += sixth * (k1[3] + 2.0 * (k2[3] + k3[3]) + k4[3])
        p += sixth * (k1[4] + 2.0 * (k2[4] + k3[4]) + k4[4])

    return Trajectory(
        t=ts[:isample],
        x=xs[:isample],
        p=ps[:isample],
        photons=ns[:isample],
        inversion=zs[:isample],
        mode="full-lamb",
        dt=dt,
        seed=None,
    )

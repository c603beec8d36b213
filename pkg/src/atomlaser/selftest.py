"""Built-in verification suite: dual-route oracles and model invariants.

Every transport coefficient in this package has two independent
derivations (a closed form and a linear-algebra route); the self test
pins them against each other at randomized points, checks the exact
structural identities (pump-loss balance, detuning parity, limiting
formulas), and exercises the stochastic layer's reproducibility contract.
Intended as a fast post-install gate: `atomlaser selftest`.
"""

from __future__ import annotations

import math
import sys

import numpy as np

from .params import SystemParams
from . import lamb as _lamb
from . import moments as _moments
from . import motion as _motion
from . import goodcavity as _gc
from . import stochsim as _stoch

_FAR_DETUNED = SystemParams(gamma=10.0, nu=20.0, g=100.0, delta=200.0)
_NEAR_RESONANT = SystemParams(gamma=20.0, nu=25.0, g=20.0, delta=10.0)


def _rel(a, b) -> float:
    scale = max(abs(a), abs(b), 1e-300)
    return abs(a - b) / scale


def _random_points(rng, params: SystemParams, n: int = 32):
    """(x, delta) pairs biased away from nodes, where both routes vanish."""
    xs = rng.uniform(0.02, 0.48, n) * params.wavelength
    deltas = rng.uniform(-300.0, 300.0, n)
    deltas[np.abs(deltas) < 1.0] += 5.0
    return xs, deltas


def check_continuity():
    worst = 0.0
    for base in (_FAR_DETUNED, _NEAR_RESONANT):
        for d in np.linspace(-250.0, 250.0, 9):
            p = base.with_updates(delta=float(d))
            for x in np.linspace(0.0, 0.5 * p.wavelength, 64):
                st = _lamb.lamb_steady_state(p, float(x))
                res = _lamb.continuity_residual(0.5 * (1 + st.z), st.photons, p)
                worst = max(worst, abs(res))
                sol = _moments.solve_self_consistent(p, float(x))
                res = _lamb.continuity_residual(sol.excited, sol.photons, p)
                worst = max(worst, abs(res))
    return worst < 1e-10, f"max |nu(1-P)-gamma P-kappa N| = {worst:.3g}"


def check_ode_attractor():
    p = _FAR_DETUNED
    ref = _lamb.rotating_steady_state(p, 0.0)
    final = _lamb.integrate_internal(
        p, 0.0, _lamb.LambState(1e-3 + 0j, 0j, _lamb.saturated_inversion(p)), 50.0
    )
    err = max(_rel(abs(final.alpha) ** 2, ref.photons), _rel(final.z, ref.z))
    return err < 1e-6, f"long-time ODE vs attractor: rel err {err:.3g}"


def check_friction_dual():
    rng = np.random.default_rng(1234)
    worst = 0.0
    for base in (
        SystemParams(gamma=10.0, nu=30.0, g=50.0),
        SystemParams(gamma=5.0, nu=40.0, g=60.0, delta=250.0),
    ):
        xs, deltas = _random_points(rng, base)
        for x, d in zip(xs, deltas):
            p = base.with_updates(delta=float(d))
            a = _motion.friction(p, float(x))
            b = _motion.friction_from_response(p, float(x))
            worst = max(worst, _rel(a, b))
    return worst < 1e-6, f"closed form vs response matrix: rel err {worst:.3g}"


def check_diffusion_dual():
    rng = np.random.default_rng(4321)
    worst, neg = 0.0, 0.0
    for base in (
        SystemParams(gamma=10.0, nu=30.0, g=50.0),
        SystemParams(gamma=5.0, nu=40.0, g=60.0, delta=250.0),
    ):
        xs, deltas = _random_points(rng, base)
        for x, d in zip(xs, deltas):
            p = base.with_updates(delta=float(d))
            a = _motion.diffusion_field(p, float(x))
            b = _motion.diffusion_from_noise(p, float(x))
            worst = max(worst, _rel(a, b))
            neg = min(neg, a)
    ok = worst < 1e-6 and neg >= 0.0
    return ok, f"polynomial vs covariance: rel err {worst:.3g}, min D {neg:.3g}"


def check_parity():
    p0 = _NEAR_RESONANT
    xs = np.linspace(0.03, 0.47, 17) * p0.wavelength
    worst = 0.0
    for d in (3.0, 17.0, 120.0):
        fp = _moments.mean_force(p0.with_updates(delta=d), xs)
        fm = _moments.mean_force(p0.with_updates(delta=-d), xs)
        scale = np.max(np.abs(fp)) + 1e-300
        worst = max(worst, float(np.max(np.abs(fp + fm)) / scale))
        lp = _lamb.force_lamb(p0.with_updates(delta=d), xs)
        lm = _lamb.force_lamb(p0.with_updates(delta=-d), xs)
        scale = np.max(np.abs(lp)) + 1e-300
        worst = max(worst, float(np.max(np.abs(lp + lm)) / scale))
    return worst < 1e-12, f"force antisymmetry in delta: {worst:.3g}"


def check_small_kappa_limits():
    # emission rate: full linewidth collapses onto the atomic one
    p = _FAR_DETUNED.with_updates(kappa=1e-3 * _FAR_DETUNED.atom_width)
    x = 0.11 * p.wavelength
    w_full = _moments.emission_rate(p, x)
    w_adiab = _lamb.emission_rate_lamb(p, x)
    err_w = _rel(w_full, w_adiab)
    # force: the moment force collapses onto the adiabatic force
    q = SystemParams(gamma=10.0, nu=100.0, g=100.0, delta=30.0, kappa=110e-3)
    x = 0.05 * q.wavelength
    err_f = _rel(_moments.mean_force(q, x), _lamb.force_lamb(q, x))
    ok = err_w < 1e-3 and err_f < 1e-3
    return ok, f"small-kappa limits: emission {err_w:.3g}, force {err_f:.3g}"


def check_goodcavity():
    t_ref = _gc.gc_temperature(_gc.OperatingPoint(a=1.0, y=2.0))
    if t_ref != 0.5:
        return False, f"T(a=1, y=2) = {t_ref!r}, expected 0.5"
    t1, a1 = _gc.gc_min_temperature(1.0)
    if abs(t1 - (math.sqrt(3.0) - 1.0)) > 1e-15:
        return False, f"T_min(1) = {t1!r}"
    worst_t, worst_a = 0.0, 0.0
    for y in (0.7, 1.0, 2.0, 5.0):
        t_closed, a_closed = _gc.gc_min_temperature(y)
        t_num, a_num = _gc.minimize_temperature_numeric(y)
        worst_t = max(worst_t, abs(t_num - t_closed))
        # the minimum is quadratically flat, so the argmin resolves
        # only to the square root of the value tolerance
        worst_a = max(worst_a, abs(a_num - a_closed))
    if worst_t > 1e-10 or worst_a > 1e-6:
        return False, f"numeric minimum off by {worst_t:.3g} (argmin {worst_a:.3g})"
    errs = _gc.gc_convergence_check(2.0, 0.5)
    ok = bool(np.all(np.diff(errs) < 0) and errs[-1] < 1e-2)
    return ok, f"limit-formula convergence errors {np.array2string(errs, precision=3)}"


def check_interpolation():
    p = _NEAR_RESONANT
    table = _stoch.CoefficientTable(p, n_grid=1024)
    xs = np.linspace(0.0, p.wavelength, 777)
    err = np.max(np.abs(table.force(xs) - _moments.mean_force(p, xs)))
    scale = np.max(np.abs(_moments.mean_force(p, xs)))
    ok = err < 1e-6 * scale
    return ok, f"force interpolant error {err:.3g} (scale {scale:.3g})"


def check_rng_reproducibility():
    p = SystemParams(gamma=5.0, nu=20.0, g=10.0, delta=60.0, recoil=0.05)
    table = _stoch.CoefficientTable(p)
    kw = dict(dt=0.1, t_end=20.0, sample_every=10, table=table)
    a = _stoch.simulate_ensemble(p, (0.1, 0.0), 6, 99, **kw)
    b = _stoch.simulate_ensemble(p, (0.1, 0.0), 6, 99, **kw)
    same = all(
        np.array_equal(ta.x, tb.x) and np.array_equal(ta.p, tb.p)
        for ta, tb in zip(a, b)
    )
    if not same:
        return False, "identical seeds produced different ensembles"
    front = _stoch.simulate_ensemble(p, (0.1, 0.0), 2, 99, **kw)
    back = _stoch.simulate_ensemble(p, (0.1, 0.0), 4, 99, traj_offset=2, **kw)
    split = front + back
    same = all(
        np.array_equal(ta.x, tb.x) and np.array_equal(ta.p, tb.p)
        for ta, tb in zip(a, split)
    )
    return same, "split ensemble reproduces the unsplit run"


def check_einstein_balance():
    p = SystemParams(gamma=5.0, nu=20.0, g=10.0, delta=60.0, recoil=0.05)
    eq = _motion.equilibrium_temperature(p)
    ok = eq.cooling and eq.kT > 0 and math.isclose(
        eq.kT, eq.diffusion_avg / abs(eq.beta_avg), rel_tol=1e-12
    )
    return ok, f"cooling point: beta_avg {eq.beta_avg:.4g}, kT {eq.kT:.4g}"


_CHECKS = [
    ("continuity", check_continuity),
    ("ode-attractor", check_ode_attractor),
    ("friction-dual", check_friction_dual),
    ("diffusion-dual", check_diffusion_dual),
    ("parity", check_parity),
    ("small-kappa-limits", check_small_kappa_limits),
    ("goodcavity", check_goodcavity),
    ("interpolation", check_interpolation),
    ("rng-reproducibility", check_rng_reproducibility),
    ("einstein-balance", check_einstein_balance),
]


def run_selftest(stream=None) -> bool:
    stream = stream or sys.stdout
    all_ok = True
    for name, check in _CHECKS:
        try:
            ok, detail = check()
        except Exception as exc:  # a crashed check is a failed check
            ok, detail = False, f"raised {type(exc).__name__}: {exc}"
        all_ok &= ok
        print(f"{'PASS' if ok else 'FAIL'} {name}: {detail}", file=stream)
    print("selftest " + ("passed" if all_ok else "FAILED"), file=stream)
    return all_ok

import math

import numpy as np
import pytest

from atomlaser import SystemParams
from atomlaser.moments import mean_force, solve_self_consistent
from atomlaser.motion import (
    diffusion_field,
    diffusion_from_noise,
    diffusion_recoil,
    equilibrium_temperature,
    first_order_response,
    friction,
    friction_from_response,
    noise_covariance,
    position_average,
    potential,
    potential_depth,
)

BASE = SystemParams(gamma=10.0, nu=30.0, g=50.0, delta=100.0)
COOL = SystemParams(gamma=5.0, nu=20.0, g=10.0, delta=60.0, recoil=0.05)


def test_friction_dual_route():
    rng = np.random.default_rng(7)
    for _ in range(12):
        x = rng.uniform(0.02, 0.23) * BASE.wavelength
        d = rng.uniform(-250.0, 250.0)
        p = BASE.with_updates(delta=d if abs(d) > 1 else 5.0)
        a = friction(p, x)
        b = friction_from_response(p, x)
        assert a == pytest.approx(b, rel=1e-8, abs=1e-12)


def test_friction_odd_in_detuning():
    xs = np.linspace(0.03, 0.22, 9) * BASE.wavelength
    bp = friction(BASE, xs)
    bm = friction(BASE.with_updates(delta=-BASE.delta), xs)
    np.testing.assert_allclose(bp, -bm, atol=1e-12 * np.max(np.abs(bp)))


def test_diffusion_dual_route_and_parity():
    rng = np.random.default_rng(8)
    for _ in range(12):
        x = rng.uniform(0.02, 0.23) * BASE.wavelength
        d = rng.uniform(-250.0, 250.0)
        p = BASE.with_updates(delta=d if abs(d) > 1 else 5.0)
        a = diffusion_field(p, x)
        b = diffusion_from_noise(p, x)
        assert a == pytest.approx(b, rel=1e-8, abs=1e-12)
        assert a >= 0.0
    xs = np.linspace(0.03, 0.22, 9) * BASE.wavelength
    dp = diffusion_field(BASE, xs)
    dm = diffusion_field(BASE.with_updates(delta=-BASE.delta), xs)
    np.testing.assert_allclose(dp, dm, rtol=1e-12)


def test_field_diffusion_nonzero_at_nodes():
    # the field gradient is steepest at a node, so the kicks survive there
    node = 0.25 * BASE.wavelength
    assert diffusion_field(BASE, node) > 0.0
    assert diffusion_field(BASE, 0.0) == pytest.approx(0.0, abs=1e-12)


def test_recoil_diffusion_tracks_excited_population():
    xs = np.linspace(0.0, 0.5 * BASE.wavelength, 11)
    for x in xs:
        sol = solve_self_consistent(BASE, float(x))
        expect = BASE.gamma * sol.excited * BASE.wavenumber**2
        assert diffusion_recoil(BASE, float(x)) == pytest.approx(expect, rel=1e-12)
    half = diffusion_recoil(BASE, 0.1, geometry=0.5)
    assert half == pytest.approx(0.5 * diffusion_recoil(BASE, 0.1), rel=1e-12)


def test_noise_covariance_is_symmetric_psd():
    sol = solve_self_consistent(BASE, 0.08)
    S = noise_covariance(BASE, sol)
    assert np.allclose(S, S.T)
    eigs = np.linalg.eigvalsh(S)
    assert np.min(eigs) > -1e-10 * np.max(np.abs(eigs))


def test_first_order_response_solves_gradient_system():
    # M X1 must reproduce the numeric spatial gradient of the steady moments
    from atomlaser.moments import system_matrix

    p, x = BASE, 0.09 * BASE.wavelength
    sol = solve_self_consistent(p, x)
    M, _ = system_matrix(p, x, sol.inversion)
    x1 = first_order_response(p, x)
    vec1 = np.array([x1.photons, x1.excited, x1.corr_re, x1.corr_im])

    h = 1e-6
    def x0_at(s):
        st = solve_self_consistent(p, s)
        return np.array([st.photons, st.excited, st.corr_re, st.corr_im])

    grad_num = (x0_at(x + h) - x0_at(x - h)) / (2.0 * h)
    np.testing.assert_allclose(
        M @ vec1, grad_num, rtol=1e-5, atol=1e-7 * np.max(np.abs(grad_num))
    )


def test_potential_shape():
    p = BASE
    assert potential(p, 0.0) == 0.0
    quarter = 0.25 * p.wavelength
    xs = np.linspace(0.0, quarter, 9)
    U = potential(p, xs)
    np.testing.assert_allclose(potential(p, -xs), U, atol=1e-12)
    np.testing.assert_allclose(potential(p, xs + 0.5 * p.wavelength), U, atol=1e-10)
    assert potential_depth(p) == pytest.approx(abs(U[-1]))
    # slope equals minus the force away from the endpoints
    h = 1e-5
    for x in (0.07, 0.6):
        slope = (potential(p, x + h) - potential(p, x - h)) / (2 * h)
        assert slope == pytest.approx(-mean_force(p, x), rel=1e-5, abs=1e-8)


def test_potential_models_differ():
    a = potential_depth(BASE, model="moments")
    b = potential_depth(BASE, model="lamb")
    assert a > 0 and b > 0 and a != pytest.approx(b, rel=1e-6)


def test_position_average():
    p = BASE
    assert position_average(lambda x: np.ones_like(np.asarray(x, float)), p) == (
        pytest.approx(1.0, rel=1e-12)
    )
    mean_cos2 = position_average(
        lambda x: np.cos(p.wavenumber * np.asarray(x, float)) ** 2, p
    )
    assert mean_cos2 == pytest.approx(0.5, rel=1e-10)
    with pytest.raises(ValueError):
        position_average(lambda x: x, p, npoints=2)


def test_equilibrium_cooling_point():
    eq = equilibrium_temperature(COOL)
    assert eq.cooling and eq.beta_avg < 0
    assert eq.kT == pytest.approx(eq.diffusion_avg / abs(eq.beta_avg), rel=1e-12)
    assert eq.kinetic == pytest.approx(0.5 * eq.kT)
    assert eq.ratio == pytest.approx(eq.kinetic / eq.depth)


def test_equilibrium_heating_point_flagged():
    eq = equilibrium_temperature(COOL.with_updates(delta=-COOL.delta))
    assert not eq.cooling
    assert math.isnan(eq.kT) and math.isnan(eq.ratio)
    assert eq.beta_avg > 0

import numpy as np
import pytest

from atomlaser import SystemParams
from atomlaser.lamb import continuity_residual, emission_rate_lamb
from atomlaser.moments import (
    det4,
    emission_rate,
    inversion_gradient_u,
    mean_force,
    rate_equation_rhs,
    solve_fixed_point,
    solve_inversion,
    solve_self_consistent,
    system_matrix,
)

NEAR_RESONANT = SystemParams(gamma=20.0, nu=25.0, g=20.0, delta=10.0)
FAR_DETUNED = SystemParams(gamma=10.0, nu=20.0, g=100.0, delta=200.0)


def test_linear_system_solved_exactly():
    # the closed forms must be a genuine null solution of the moment system
    for p in (NEAR_RESONANT, FAR_DETUNED, NEAR_RESONANT.with_updates(delta=-40.0)):
        for x in (0.05, 0.11, 0.21):
            sol = solve_self_consistent(p, x)
            M, v = system_matrix(p, x, sol.inversion)
            vec = np.array([sol.photons, sol.excited, sol.corr_re, sol.corr_im])
            resid = M @ vec + v
            assert np.max(np.abs(resid)) < 1e-9 * max(1.0, np.max(np.abs(vec)))


def test_system_matrix_rejects_bad_inversion():
    with pytest.raises(ValueError):
        system_matrix(NEAR_RESONANT, 0.1, 1.5)


def test_inversion_is_physical_and_det_positive():
    us = np.linspace(0.0, NEAR_RESONANT.g**2, 200)
    Z = solve_inversion(NEAR_RESONANT, us)
    assert np.all(np.abs(Z) <= 1.0)
    assert np.all(det4(NEAR_RESONANT, us, Z) > 0.0)


def test_uncoupled_limit():
    p = NEAR_RESONANT
    z0 = (p.nu - p.gamma) / (p.nu + p.gamma)
    assert solve_inversion(p, 0.0) == pytest.approx(z0, rel=1e-14)


def test_closed_form_matches_fixed_point_iteration():
    for x in (0.04, 0.13, 0.22):
        a = solve_self_consistent(NEAR_RESONANT, x)
        z_iter = solve_fixed_point(NEAR_RESONANT, x)
        assert a.inversion == pytest.approx(z_iter, abs=1e-10)


def test_rate_equation_fixed_point():
    sol = solve_self_consistent(NEAR_RESONANT, 0.07)
    dN, dP = rate_equation_rhs(sol.photons, sol.excited, sol.inversion, NEAR_RESONANT, 0.07)
    assert abs(dN) < 1e-9 and abs(dP) < 1e-9


def test_continuity_everywhere():
    xs = np.linspace(0.0, 0.5 * NEAR_RESONANT.wavelength, 33)
    for x in xs:
        sol = solve_self_consistent(NEAR_RESONANT, float(x))
        res = continuity_residual(sol.excited, sol.photons, NEAR_RESONANT)
        assert abs(res) < 1e-10


def test_emission_rate_reduces_to_atomic_linewidth():
    p = FAR_DETUNED.with_updates(kappa=1e-3 * FAR_DETUNED.atom_width)
    x = 0.11 * p.wavelength
    assert emission_rate(p, x) == pytest.approx(emission_rate_lamb(p, x), rel=1e-3)


def test_force_odd_in_detuning():
    xs = np.linspace(0.02, 0.48, 21) * NEAR_RESONANT.wavelength
    fp = mean_force(NEAR_RESONANT, xs)
    fm = mean_force(NEAR_RESONANT.with_updates(delta=-NEAR_RESONANT.delta), xs)
    np.testing.assert_allclose(fp, -fm, atol=1e-13 * np.max(np.abs(fp)))
    assert np.max(np.abs(mean_force(NEAR_RESONANT.with_updates(delta=0.0), xs))) == 0.0


def test_force_vanishes_at_symmetry_points():
    assert mean_force(NEAR_RESONANT, 0.0) == 0.0
    assert mean_force(NEAR_RESONANT, 0.25 * NEAR_RESONANT.wavelength) == pytest.approx(0.0, abs=1e-12)


def test_inversion_gradient_matches_numeric():
    u0 = 150.0
    h = 1e-4 * u0
    Z = solve_inversion(NEAR_RESONANT, u0)
    dZ = inversion_gradient_u(NEAR_RESONANT, u0, Z)
    num = (solve_inversion(NEAR_RESONANT, u0 + h) - solve_inversion(NEAR_RESONANT, u0 - h)) / (2 * h)
    assert dZ == pytest.approx(num, rel=1e-6)


def test_photon_number_continuous_through_threshold():
    # unlike the factorized model, fluctuations keep N finite and smooth
    xs = np.linspace(0.0, 0.25 * FAR_DETUNED.wavelength, 400)
    N = np.array([solve_self_consistent(FAR_DETUNED, float(x)).photons for x in xs])
    assert np.all(N > 0.0)
    assert np.max(np.abs(np.diff(N))) < 0.15

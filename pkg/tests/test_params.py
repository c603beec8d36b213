import math

import numpy as np
import pytest

from atomlaser import SystemParams, coupling, grad_coupling


def test_rate_validation():
    with pytest.raises(ValueError):
        SystemParams(gamma=-1.0, nu=2.0, g=3.0)
    with pytest.raises(ValueError):
        SystemParams(gamma=1.0, nu=-2.0, g=3.0)
    with pytest.raises(ValueError):
        SystemParams(gamma=1.0, nu=2.0, g=3.0, kappa=0.0)
    with pytest.raises(ValueError):
        SystemParams(gamma=1.0, nu=2.0, g=3.0, recoil=0.0)
    with pytest.raises(ValueError):
        SystemParams(gamma=1.0, nu=2.0, g=3.0, wavenumber=-1.0)


def test_derived_rates():
    p = SystemParams(gamma=10.0, nu=20.0, g=100.0, delta=200.0)
    assert p.atom_width == 30.0
    assert p.total_width == 31.0
    assert p.wavelength == pytest.approx(2.0 * math.pi)
    # the mass follows from the chosen recoil frequency: m = k^2 / (2 w_r)
    assert p.mass == pytest.approx(1.0 / (2.0 * 0.01))
    assert p.doppler_energy == 10.0
    assert p.recoil_energy == 0.01
    assert p.doppler_momentum == pytest.approx(math.sqrt(p.mass * p.gamma))


def test_with_updates_is_functional():
    p = SystemParams(gamma=1.0, nu=2.0, g=3.0)
    q = p.with_updates(delta=5.0)
    assert q.delta == 5.0 and p.delta == 0.0
    assert q.gamma == p.gamma
    with pytest.raises(Exception):
        p.gamma = 7.0  # frozen


def test_coupling_profile():
    p = SystemParams(gamma=1.0, nu=2.0, g=4.0, wavenumber=2.0)
    assert coupling(p, 0.0) == 4.0
    assert grad_coupling(p, 0.0) == 0.0
    quarter = 0.25 * p.wavelength
    assert coupling(p, quarter) == pytest.approx(0.0, abs=1e-12)
    assert grad_coupling(p, quarter) == pytest.approx(-4.0 * 2.0)
    xs = np.linspace(0.0, p.wavelength, 64)
    np.testing.assert_allclose(coupling(p, xs), 4.0 * np.cos(2.0 * xs), atol=1e-14)
    # gradient consistent with a central difference
    h = 1e-6
    num = (coupling(p, xs + h) - coupling(p, xs - h)) / (2.0 * h)
    np.testing.assert_allclose(grad_coupling(p, xs), num, atol=1e-5)


def test_scalar_in_scalar_out():
    p = SystemParams(gamma=1.0, nu=2.0, g=3.0)
    assert np.ndim(coupling(p, 0.3)) == 0
    assert np.ndim(grad_coupling(p, 0.3)) == 0
    assert coupling(p, np.linspace(0, 1, 5)).shape == (5,)

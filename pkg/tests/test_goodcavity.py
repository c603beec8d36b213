import math

import numpy as np
import pytest

from atomlaser import SystemParams
from atomlaser.goodcavity import (
    OperatingPoint,
    _family_params,
    gc_convergence_check,
    gc_min_temperature,
    gc_temperature,
    minimize_temperature_numeric,
)
from atomlaser.moments import emission_rate


def test_operating_point_validation():
    with pytest.raises(ValueError):
        OperatingPoint(a=0.0, y=1.0)
    with pytest.raises(ValueError):
        OperatingPoint(a=1.0, y=-2.0)


def test_threshold_point_gives_inverse_pumping_ratio():
    for y in (0.5, 1.0, 2.0, 7.0):
        assert gc_temperature(OperatingPoint(a=1.0, y=y)) == pytest.approx(1.0 / y)


def test_min_formula_against_numeric():
    for y in (0.6, 1.0, 2.0, 4.0, 8.0):
        t_closed, a_closed = gc_min_temperature(y)
        t_num, a_num = minimize_temperature_numeric(y)
        assert t_num == pytest.approx(t_closed, abs=1e-10)
        assert a_num == pytest.approx(a_closed, abs=1e-6)
        assert a_closed < 1.0


def test_min_decreases_with_pumping_ratio():
    ys = np.linspace(0.3, 10.0, 40)
    ts = [gc_min_temperature(float(y))[0] for y in ys]
    assert np.all(np.diff(ts) < 0)


def test_beats_passive_limit_beyond_half():
    # kT below the bare cavity linewidth once y exceeds 1/2
    t, _ = gc_min_temperature(0.5)
    assert t == pytest.approx(1.0)
    t, _ = gc_min_temperature(0.51)
    assert t < 1.0


def test_family_member_hits_requested_operating_point():
    y, a, x_ref = 2.0, 0.5, math.pi / 4
    p = _family_params(1e-2, y, a, x_ref, kappa=1.0)
    assert p.gamma == 0.0
    assert p.nu / p.delta == pytest.approx(y)
    # stimulated rate at the reference point equals a * kappa
    assert emission_rate(p, x_ref) == pytest.approx(a * p.kappa, rel=1e-12)


def test_convergence_toward_limit():
    errs = gc_convergence_check(2.0, 0.5)
    assert np.all(np.diff(errs) < 0)
    assert errs[-1] < 1e-2


def test_convergence_requires_no_spontaneous_decay():
    with pytest.raises(ValueError):
        gc_convergence_check(2.0, 0.5, gamma=1.0)

import math

import numpy as np
import pytest

from atomlaser import SystemParams
from atomlaser.moments import mean_force
from atomlaser.stochsim import (
    CoefficientTable,
    PeriodicCubic,
    ensemble_stats,
    simulate,
    simulate_ensemble,
    step_doubling_check,
)

COOL = SystemParams(gamma=5.0, nu=20.0, g=10.0, delta=60.0, recoil=0.05)


def test_periodic_cubic_accuracy_and_wrap():
    period = 2.0
    grid = np.linspace(0.0, period, 64, endpoint=False)
    f = PeriodicCubic(np.sin(2 * np.pi * grid / period), period)
    xs = np.linspace(-3.0, 7.0, 211)
    np.testing.assert_allclose(f(xs), np.sin(2 * np.pi * xs / period), atol=2e-6)
    assert f(0.3) == pytest.approx(f(0.3 + period), abs=1e-12)
    with pytest.raises(ValueError):
        PeriodicCubic([1.0, 2.0], period)


def test_table_interpolants_match_direct_evaluation():
    table = CoefficientTable(COOL, n_grid=512)
    xs = np.linspace(0.0, COOL.wavelength, 301)
    direct = mean_force(COOL, xs)
    np.testing.assert_allclose(table.force(xs), direct, atol=1e-8)
    assert table.osc_freq > 0.0
    assert table.beta_avg < 0.0  # red detuning cools


def test_table_rejects_unknown_model():
    with pytest.raises(ValueError):
        CoefficientTable(COOL, model="quantum")


def test_step_guard():
    with pytest.raises(ValueError, match="dt"):
        simulate(COOL, (0.0, 0.0), seed=1, dt=50.0, t_end=100.0)


def test_single_equals_first_of_ensemble():
    table = CoefficientTable(COOL)
    one = simulate(COOL, (0.1, 0.0), seed=5, dt=0.1, t_end=10.0, table=table)
    many = simulate_ensemble(COOL, (0.1, 0.0), 3, 5, 0.1, 10.0, table=table)
    np.testing.assert_array_equal(one.x, many[0].x)
    np.testing.assert_array_equal(one.p, many[0].p)


def test_seed_reproducibility_and_divergence():
    table = CoefficientTable(COOL)
    kw = dict(dt=0.1, t_end=10.0, table=table)
    a = simulate_ensemble(COOL, (0.1, 0.0), 4, 11, **kw)
    b = simulate_ensemble(COOL, (0.1, 0.0), 4, 11, **kw)
    c = simulate_ensemble(COOL, (0.1, 0.0), 4, 12, **kw)
    for ta, tb in zip(a, b):
        np.testing.assert_array_equal(ta.x, tb.x)
    assert not np.array_equal(a[0].x, c[0].x)
    # distinct trajectories within one ensemble
    assert not np.array_equal(a[0].x, a[1].x)


def test_split_ensemble_matches_unsplit():
    table = CoefficientTable(COOL)
    kw = dict(dt=0.1, t_end=10.0, table=table)
    whole = simulate_ensemble(COOL, (0.1, 0.0), 5, 77, **kw)
    front = simulate_ensemble(COOL, (0.1, 0.0), 2, 77, **kw)
    back = simulate_ensemble(COOL, (0.1, 0.0), 3, 77, traj_offset=2, **kw)
    for ta, tb in zip(whole, front + back):
        np.testing.assert_array_equal(ta.x, tb.x)
        np.testing.assert_array_equal(ta.p, tb.p)


def _constant_table(force=0.0, beta=-0.5, diffusion=2.0):
    table = CoefficientTable(COOL, n_grid=16)
    period = 0.5 * COOL.wavelength
    table.force = PeriodicCubic(np.full(16, force), period)
    table.friction = PeriodicCubic(np.full(16, beta), period)
    table.diffusion = PeriodicCubic(np.full(16, diffusion), period)
    table.photons = PeriodicCubic(np.zeros(16), period)
    table.beta_avg = beta
    table.beta_max = abs(beta)
    table.osc_freq = 0.0
    return table


def test_pure_drag_decays_exactly():
    # no force, no noise: the discrete map is a known geometric decay
    beta, dt, n = -0.5, 0.05, 200
    table = _constant_table(beta=beta, diffusion=0.0)
    traj = simulate(COOL, (0.0, 3.0), seed=0, dt=dt, t_end=n * dt, table=table)
    m = COOL.mass
    expect = 3.0 * (1.0 + beta * dt / m) ** n
    assert traj.p[-1] == pytest.approx(expect, rel=1e-12)


def test_constant_coefficient_thermalization():
    # Ornstein-Uhlenbeck limit: stationary kinetic temperature D/|beta|
    beta, D = -0.5, 2.0
    table = _constant_table(beta=beta, diffusion=D)
    trajs = simulate_ensemble(
        COOL, (0.0, 0.0), 64, 321, 0.05, 400.0, sample_every=4, table=table
    )
    stats = ensemble_stats(trajs, window=0.5)
    target = D / abs(beta)
    assert abs(stats.kT_emp - target) < 3.0 * stats.kT_se


def test_step_doubling_runs_and_is_coupled():
    table = CoefficientTable(COOL)
    coarse, fine, shift = step_doubling_check(
        COOL, (0.1, 0.0), 16, 9, 0.1, 120.0, sample_every=5, table=table
    )
    assert coarse.n_traj == fine.n_traj == 16
    assert coarse.kT_se > 0 and fine.kT_se > 0
    assert math.isfinite(shift)
    # common noise keeps the pair far closer than independent runs would be
    assert abs(shift) < 3.0 * coarse.kT_se


def test_full_lamb_mode_passthrough():
    p = SystemParams(gamma=10.0, nu=20.0, g=100.0, delta=200.0)
    traj = simulate(p, (0.0, 10.0), seed=4, dt=4e-4, t_end=1.0, mode="full-lamb",
                    sample_every=50)
    assert traj.mode == "full-lamb"
    assert traj.seed == 4
    assert traj.meta["mass"] == p.mass
    assert np.all(np.isfinite(traj.photons))


def test_heating_flag_on_blue_detuning():
    p = COOL.with_updates(delta=-COOL.delta)
    traj = simulate(p, (0.1, 0.0), seed=2, dt=0.05, t_end=5.0)
    assert traj.heating_flagged


def test_ensemble_stats_validation():
    table = CoefficientTable(COOL)
    trajs = simulate_ensemble(COOL, (0.1, 0.0), 2, 3, 0.1, 10.0, table=table)
    with pytest.raises(ValueError):
        ensemble_stats([], 0.5)
    with pytest.raises(ValueError):
        ensemble_stats(trajs, 0.0)
    other = simulate(COOL, (0.1, 0.0), seed=3, dt=0.05, t_end=10.0, table=table)
    with pytest.raises(ValueError):
        ensemble_stats([trajs[0], other], 0.5)


def test_single_trajectory_batch_errors():
    traj = simulate(COOL, (0.1, 0.0), seed=6, dt=0.1, t_end=200.0, sample_every=2)
    stats = ensemble_stats([traj], 0.5)
    assert stats.n_traj == 1
    assert stats.kT_se > 0.0
    assert 0.0 <= stats.loc <= 1.0

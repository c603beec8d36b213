"""Semiclassical stochastic trajectories of the atom in the lasing cavity.

The atom moves under the position-dependent mean force with a velocity-linear
friction correction and Gaussian momentum noise whose strength is the local
total momentum diffusion.  All three coefficients are precomputed once on a
half-wavelength grid and interpolated with periodic cubics, which makes a
trajectory step a handful of vectorized array operations; ensembles propagate
all trajectories in lockstep.

Reproducibility: every trajectory draws from its own counter-based stream
spawned from (seed, trajectory index), so results are bit-identical
regardless of ensemble splitting or worker count.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.interpolate import CubicSpline

from .params import SystemParams, coupling
from .trajectory import Trajectory
from . import lamb as _lamb
from . import moments as _moments
from . import motion as _motion


class PeriodicCubic:
    """Periodic cubic interpolation on a uniform grid, tuned for hot loops."""

    def __init__(self, values, period: float):
        values = np.asarray(values, dtype=float)
        n = len(values)
        if n < 4:
            raise ValueError("need at least 4 grid values")
        xs = np.linspace(0.0, period, n + 1)
        ys = np.concatenate([values, values[:1]])
        self._coeffs = CubicSpline(xs, ys, bc_type="periodic").c
        self.period = period
        self._h = period / n
        self._n = n

    def __call__(self, x):
        xi = np.mod(x, self.period)
        idx = np.minimum((xi / self._h).astype(np.int64), self._n - 1)
        t = xi - idx * self._h
        c = self._coeffs
        return ((c[0, idx] * t + c[1, idx]) * t + c[2, idx]) * t + c[3, idx]


class CoefficientTable:
    """Transport coefficients sampled on a half-wavelength grid.

    Holds periodic interpolants for the mean force, friction, total momentum
    diffusion, and the steady photon number, plus the scalars the integrator
    needs for its stability guard and heating diagnosis.
    """

    def __init__(
        self,
        params: SystemParams,
        n_grid: int = 1024,
        model: str = "moments",
        recoil_geometry: float = 1.0,
    ):
        period = 0.5 * params.wavelength
        xs = np.linspace(0.0, period, n_grid, endpoint=False)
        if model == "moments":
            force = _moments.mean_force(params, xs)
            G = coupling(params, xs)
            u = G * G
            Z = _moments.solve_inversion(params, u)
            photons = params.nu * params.total_width * u / _moments.det4(params, u, Z)
        elif model == "lamb":
            force = _lamb.force_lamb(params, xs)
            photons = np.array(
                [_lamb.lamb_steady_state(params, float(x)).photons for x in xs]
            )
        else:
            raise ValueError(f"unknown force model {model!r}")
        beta = _motion.friction(params, xs)
        diff_total = _motion.diffusion_field(params, xs) + _motion.diffusion_recoil(
            params, xs, geometry=recoil_geometry
        )

        self.params = params
        self.mass = params.mass
        self.force = PeriodicCubic(force, period)
        self.friction = PeriodicCubic(beta, period)
        self.diffusion = PeriodicCubic(diff_total, period)
        self.photons = PeriodicCubic(photons, period)
        self.beta_avg = float(np.mean(beta))
        self.beta_max = float(np.max(np.abs(beta)))

        # curvature at the potential minimum sets the oscillation frequency
        x_min = 0.0 if params.delta >= 0 else 0.5 * period
        h = period / n_grid
        slope = (self.force(x_min + h) - self.force(x_min - h)) / (2.0 * h)
        self.osc_freq = math.sqrt(max(-slope, 0.0) / self.mass)


def _check_step(table: CoefficientTable, dt: float):
    limits = []
    if table.beta_max > 0:
        limits.append(0.1 * table.mass / table.beta_max)
    if table.osc_freq > 0:
        limits.append(0.1 / table.osc_freq)
    dt_max = min(limits) if limits else math.inf
    if dt > dt_max:
        raise ValueError(
            f"dt={dt:g} unstable for these coefficients; use dt <= {dt_max:.3g}"
        )


@dataclass
class EnsembleStats:
    """Late-time ensemble estimators with batch-means standard errors."""

    kT_emp: float
    kT_se: float
    loc: float
    loc_se: float
    n_traj: int
    window: float


def simulate_ensemble(
    params: SystemParams,
    init,
    n_traj: int,
    seed: int,
    dt: float,
    t_end: float,
    mode: str = "adiabatic-stochastic",
    sample_every: int = 1,
    n_grid: int = 1024,
    model: str = "moments",
    recoil_geometry: float = 1.0,
    table: CoefficientTable | None = None,
    traj_offset: int = 0,
):
    """Propagate n_traj independent trajectories from a common initial state.

    Trajectory i draws its noise from the stream spawned with key
    (seed, traj_offset + i); splitting an ensemble across calls with
    matching offsets reproduces the unsplit run exactly.  Returns a list
    of Trajectory.
    """
    if dt <= 0 or t_end <= 0:
        raise ValueError("dt and t_end must be positive")
    if n_traj < 1:
        raise ValueError("n_traj must be >= 1")
    if sample_every < 1:
        raise ValueError("sample_every must be >= 1")

    if mode == "full-lamb":
        return [
            _lamb.integrate_coupled(params, init, dt, t_end, sample_every)
            for _ in range(n_traj)
        ]
    if mode != "adiabatic-stochastic":
        raise ValueError(f"unknown mode {mode!r}")

    if table is None:
        table = CoefficientTable(
            params, n_grid=n_grid, model=model, recoil_geometry=recoil_geometry
        )
    _check_step(table, dt)
    heating = table.beta_avg >= 0.0

    x0, p0 = init
    x = np.full(n_traj, float(x0)) if np.ndim(x0) == 0 else np.asarray(x0, float).copy()
    p = np.full(n_traj, float(p0)) if np.ndim(p0) == 0 else np.asarray(p0, float).copy()
    if len(x) != n_traj or len(p) != n_traj:
        raise ValueError("initial condition arrays must have length n_traj")

    n_steps = int(round(t_end / dt))
    n_samp = n_steps // sample_every + 1
    xs_out = np.empty((n_traj, n_samp))
    ps_out = np.empty((n_traj, n_samp))

    # spawn_key keeps streams collision-free across both seeds and offsets
    gens = [
        np.random.Generator(np.random.Philox(
            np.random.SeedSequence(entropy=seed, spawn_key=(traj_offset + i,))))
        for i in range(n_traj)
    ]
    inv_m = 1.0 / table.mass
    tab_f, tab_b, tab_d = table.force, table.friction, table.diffusion
    two_dt = 2.0 * dt

    xs_out[:, 0] = x
    ps_out[:, 0] = p
    isamp = 1
    block = 4096
    buf = np.empty((n_traj, block))
    for start in range(0, n_steps, block):
        m = min(block, n_steps - start)
        for i, gen in enumerate(gens):
            buf[i, :m] = gen.standard_normal(m)
        for j in range(m):
            drift = tab_f(x) + tab_b(x) * (p * inv_m)
            kick = np.sqrt(np.maximum(tab_d(x), 0.0) * two_dt)
            p += drift * dt + kick * buf[:, j]
            x += p * inv_m * dt
            if (start + j + 1) % sample_every == 0:
                xs_out[:, isamp] = x
                ps_out[:, isamp] = p
                isamp += 1

    ts = np.arange(n_samp) * (sample_every * dt)
    meta = {"wavelength": params.wavelength, "mass": params.mass}
    trajs = []
    for i in range(n_traj):
        trajs.append(
            Trajectory(
                t=ts.copy(),
                x=xs_out[i],
                p=ps_out[i],
                photons=np.asarray(table.photons(xs_out[i]), dtype=float),
                inversion=np.full(n_samp, np.nan),
                mode=mode,
                dt=dt,
                seed=seed,
                heating_flagged=heating,
                meta=dict(meta, stream=traj_offset + i),
            )
        )
    return trajs


def simulate(
    params: SystemParams,
    init,
    seed: int,
    dt: float,
    t_end: float,
    mode: str = "adiabatic-stochastic",
    sample_every: int = 1,
    n_grid: int = 1024,
    model: str = "moments",
    recoil_geometry: float = 1.0,
    table: CoefficientTable | None = None,
) -> Trajectory:
    """Single trajectory; equivalent to trajectory 0 of an ensemble."""
    if mode == "full-lamb":
        traj = _lamb.integrate_coupled(params, init, dt, t_end, sample_every)
        traj.seed = seed
        traj.meta.update(wavelength=params.wavelength, mass=params.mass)
        return traj
    return simulate_ensemble(
        params,
        init,
        1,
        seed,
        dt,
        t_end,
        mode=mode,
        sample_every=sample_every,
        n_grid=n_grid,
        model=model,
        recoil_geometry=recoil_geometry,
        table=table,
    )[0]


def step_doubling_check(
    params: SystemParams,
    init,
    n_traj: int,
    seed: int,
    dt: float,
    t_end: float,
    sample_every: int = 1,
    window: float = 0.5,
    n_grid: int = 1024,
    model: str = "moments",
    recoil_geometry: float = 1.0,
    table: CoefficientTable | None = None,
):
    """Weak-convergence diagnostic with common random numbers.

    Propagates the same ensemble at step dt and at dt/2, feeding the
    coarse chain the pairwise sums of the fine chain's noise increments.
    The coupling cancels sampling noise from the comparison, so the
    returned shift in kT_emp isolates the discretization bias; two
    independent runs would differ by ~sqrt(2) standard errors even for a
    perfect integrator.  Returns (coarse_stats, fine_stats, shift).
    """
    if dt <= 0 or t_end <= 0:
        raise ValueError("dt and t_end must be positive")
    if n_traj < 2:
        raise ValueError("need at least 2 trajectories for standard errors")
    if sample_every < 1:
        raise ValueError("sample_every must be >= 1")

    if table is None:
        table = CoefficientTable(
            params, n_grid=n_grid, model=model, recoil_geometry=recoil_geometry
        )
    _check_step(table, dt)
    heating = table.beta_avg >= 0.0

    x0, p0 = init
    xc = np.full(n_traj, float(x0)) if np.ndim(x0) == 0 else np.asarray(x0, float).copy()
    pc = np.full(n_traj, float(p0)) if np.ndim(p0) == 0 else np.asarray(p0, float).copy()
    xf, pf = xc.copy(), pc.copy()

    n_coarse = int(round(t_end / dt))
    n_fine = 2 * n_coarse
    half = 0.5 * dt
    n_samp = n_coarse // sample_every + 1
    out = {
        "c": (np.empty((n_traj, n_samp)), np.empty((n_traj, n_samp))),
        "f": (np.empty((n_traj, n_samp)), np.empty((n_traj, n_samp))),
    }
    out["c"][0][:, 0], out["c"][1][:, 0] = xc, pc
    out["f"][0][:, 0], out["f"][1][:, 0] = xf, pf

    gens = [
        np.random.Generator(np.random.Philox(
            np.random.SeedSequence(entropy=seed, spawn_key=(i,))))
        for i in range(n_traj)
    ]
    inv_m = 1.0 / table.mass
    tab_f, tab_b, tab_d = table.force, table.friction, table.diffusion
    inv_sqrt2 = 1.0 / math.sqrt(2.0)

    isamp = 1
    block = 4096
    buf = np.empty((n_traj, block))
    acc = np.zeros(n_traj)
    for start in range(0, n_fine, block):
        m = min(block, n_fine - start)
        for i, gen in enumerate(gens):
            buf[i, :m] = gen.standard_normal(m)
        for j in range(m):
            xi = buf[:, j]
            drift = tab_f(xf) + tab_b(xf) * (pf * inv_m)
            kick = np.sqrt(np.maximum(tab_d(xf), 0.0) * dt)  # 2 * D * half
            pf += drift * half + kick * xi
            xf += pf * inv_m * half
            acc += xi
            step = start + j + 1
            if step % 2 == 0:
                zeta = acc * inv_sqrt2
                acc[:] = 0.0
                drift = tab_f(xc) + tab_b(xc) * (pc * inv_m)
                kick = np.sqrt(np.maximum(tab_d(xc), 0.0) * 2.0 * dt)
                pc += drift * dt + kick * zeta
                xc += pc * inv_m * dt
                if (step // 2) % sample_every == 0:
                    out["c"][0][:, isamp], out["c"][1][:, isamp] = xc, pc
                    out["f"][0][:, isamp], out["f"][1][:, isamp] = xf, pf
                    isamp += 1

    ts = np.arange(n_samp) * (sample_every * dt)
    meta = {"wavelength": params.wavelength, "mass": params.mass}
    stats = {}
    for tag, step in (("c", dt), ("f", half)):
        xs_out, ps_out = out[tag]
        trajs = [
            Trajectory(
                t=ts.copy(), x=xs_out[i], p=ps_out[i],
                photons=np.asarray(table.photons(xs_out[i]), dtype=float),
                inversion=np.full(n_samp, np.nan),
                mode="adiabatic-stochastic", dt=step, seed=seed,
                heating_flagged=heating, meta=dict(meta, stream=i),
            )
            for i in range(n_traj)
        ]
        stats[tag] = ensemble_stats(trajs, window)
    shift = stats["f"].kT_emp - stats["c"].kT_emp
    return stats["c"], stats["f"], shift


def _antinode_distance(x, wavelength: float):
    """Distance to the nearest field antinode (x = 0 mod lambda/2)."""
    half = 0.5 * wavelength
    r = np.mod(x, half)
    return np.minimum(r, half - r)


def ensemble_stats(trajs, window: float) -> EnsembleStats:
    """Late-time temperature and localization estimators.

    kT_emp averages p^2/m over the trailing `window` fraction of each
    trajectory and then over trajectories; loc is the fraction of those
    samples within an eighth of a wavelength of an antinode.  Standard
    errors come from batch means: across trajectories when there are
    several, across eight time batches for a single trajectory.
    """
    trajs = list(trajs)
    if not trajs:
        raise ValueError("no trajectories given")
    if not 0.0 < window <= 1.0:
        raise ValueError("window must be in (0, 1]")
    mode = trajs[0].mode
    dt = trajs[0].dt
    for tr in trajs:
        if tr.mode != mode or tr.dt != dt:
            raise ValueError("trajectories do not share mode and step")

    kws, locs = [], []
    for tr in trajs:
        mass = tr.meta.get("mass")
        wavelength = tr.meta.get("wavelength", 2.0 * math.pi)
        if mass is None:
            raise ValueError("trajectory lacks mass metadata")
        n = len(tr)
        i0 = min(n - 1, int(math.floor(n * (1.0 - window))))
        psq = tr.p[i0:] ** 2 / mass
        near = _antinode_distance(tr.x[i0:], wavelength) <= wavelength / 8.0
        kws.append(psq)
        locs.append(near)

    per_traj_kt = np.array([np.mean(w) for w in kws])
    per_traj_loc = np.array([np.mean(lo) for lo in locs])
    if len(trajs) > 1:
        kT = float(np.mean(per_traj_kt))
        kT_se = float(np.std(per_traj_kt, ddof=1) / math.sqrt(len(trajs)))
        loc = float(np.mean(per_traj_loc))
        loc_se = float(np.std(per_traj_loc, ddof=1) / math.sqrt(len(trajs)))
    else:
        kT = float(per_traj_kt[0])
        loc = float(per_traj_loc[0])
        batches_k = [np.mean(b) for b in np.array_split(kws[0], 8) if len(b)]
        batches_l = [np.mean(b) for b in np.array_split(locs[0], 8) if len(b)]
        kT_se = float(np.std(batches_k, ddof=1) / math.sqrt(len(batches_k)))
        loc_se = float(np.std(batches_l, ddof=1) / math.sqrt(len(batches_l)))
    return EnsembleStats(
        kT_emp=kT, kT_se=kT_se, loc=loc, loc_se=loc_se,
        n_traj=len(trajs), window=window,
    )

"""Command-line front end: steady-state tables, temperature sweeps,
trajectory runs, good-cavity curves, and a self-test gate.

Configuration is a single flat JSON document (file via --config) whose keys
match the per-command flags; flags passed on the command line take
precedence over the file.  Unknown keys are rejected.  Every CSV starts
with two `#` comment lines (effective config, code version) followed by a
header row, and all floats are written in shortest round-trip form, so a
rerun of the same config is byte-identical.

Sweep points and trajectory blocks are dispatched to a process pool sized
by --threads (default: all processors) and reassembled in input order, so
the output does not depend on the pool size either.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys
from concurrent.futures import ProcessPoolExecutor

import numpy as np
from scipy.optimize import brentq

from . import __version__
from .params import SystemParams, coupling
from . import lamb as _lamb
from . import moments as _moments
from . import motion as _motion
from . import goodcavity as _gc
from . import stochsim as _stoch
from .selftest import run_selftest


class ConfigError(Exception):
    """Invalid configuration; reported on stderr with exit code 2."""


_REQUIRED = object()

_PARAM_KEYS = {
    "gamma": (float, _REQUIRED),
    "nu": (float, _REQUIRED),
    "g": (float, _REQUIRED),
    "delta": (float, 0.0),
    "kappa": (float, 1.0),
    "wavenumber": (float, 1.0),
    "recoil": (float, 0.01),
}

# key -> (type, default); list-valued keys are config-file only
_SCHEMAS = {
    "steady": {
        **_PARAM_KEYS,
        "x_points": (int, 256),
        "delta_values": (list, None),
    },
    "temperature": {
        **{k: v for k, v in _PARAM_KEYS.items() if k != "nu"},
        "nu": (float, None),
        "sweep": (str, _REQUIRED),
        "sweep_values": (list, _REQUIRED),
        "target_max_photons": (float, None),
    },
    "trajectory": {
        **_PARAM_KEYS,
        "mode": (str, "adiabatic-stochastic"),
        "model": (str, "moments"),
        "x0": (float, 0.0),
        "p0": (float, 0.0),
        "dt": (float, _REQUIRED),
        "t_end": (float, _REQUIRED),
        "n_traj": (int, 1),
        "sample_every": (int, 1),
        "window": (float, 0.5),
        "recoil_geometry": (float, 1.0),
        "seed": (int, 0),
    },
    "goodcavity": {
        "y_values": (list, _REQUIRED),
        "a_values": (list, None),
        "a_min": (float, 0.05),
        "a_max": (float, 2.0),
        "a_points": (int, 64),
        "conv_y": (float, 2.0),
        "conv_a": (float, 0.5),
        "conv_ratios": (list, [0.1, 0.01, 0.001]),
    },
    "selftest": {},
}

_DEFAULT_OUT = {
    "steady": "steady.csv",
    "temperature": "temperature.csv",
    "trajectory": "trajectory.csv",
    "goodcavity": "goodcavity.csv",
}


def _coerce(key: str, typ, value):
    if value is None:
        return None
    if typ is float:
        if isinstance(value, bool) or not isinstance(value, (int, float)):
            raise ConfigError(f"key {key!r}: expected a number, got {value!r}")
        return float(value)
    if typ is int:
        if isinstance(value, bool) or not isinstance(value, int):
            raise ConfigError(f"key {key!r}: expected an integer, got {value!r}")
        return int(value)
    if typ is str:
        if not isinstance(value, str):
            raise ConfigError(f"key {key!r}: expected a string, got {value!r}")
        return value
    if typ is list:
        if not isinstance(value, list) or not value:
            raise ConfigError(f"key {key!r}: expected a non-empty list")
        out = []
        for v in value:
            if isinstance(v, bool) or not isinstance(v, (int, float)):
                raise ConfigError(f"key {key!r}: expected numbers, got {v!r}")
            out.append(float(v))
        return out
    raise AssertionError(typ)


def _load_config_file(path: str) -> dict:
    try:
        with open(path, "r", encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path!r}: {exc}") from exc
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(
            f"config {path!r}: invalid JSON at line {exc.lineno}, column {exc.colno}: "
            f"{exc.msg}"
        ) from exc
    if not isinstance(doc, dict):
        raise ConfigError(f"config {path!r}: top level must be a JSON object")
    return doc


def resolve_config(command: str, args: argparse.Namespace) -> dict:
    """Merge schema defaults, config file, and explicit flags (flags win)."""
    schema = _SCHEMAS[command]
    cfg = {}
    file_doc = _load_config_file(args.config) if args.config else {}
    unknown = sorted(set(file_doc) - set(schema))
    if unknown:
        raise ConfigError(
            f"unknown config key(s) {', '.join(map(repr, unknown))}; "
            f"valid keys: {', '.join(sorted(schema))}"
        )
    for key, (typ, default) in schema.items():
        if key in file_doc:
            cfg[key] = _coerce(key, typ, file_doc[key])
        elif default is not _REQUIRED:
            cfg[key] = default
    for key, (typ, _) in schema.items():
        flag_val = getattr(args, key, None)
        if flag_val is not None:
            cfg[key] = _coerce(key, typ, flag_val)
    if command == "trajectory" and args.seed is not None:
        cfg["seed"] = _coerce("seed", int, args.seed)
    missing = [k for k, (_, d) in schema.items() if d is _REQUIRED and k not in cfg]
    if missing:
        raise ConfigError(f"missing required key(s): {', '.join(sorted(missing))}")
    return cfg


def _params_from(cfg: dict, **overrides) -> SystemParams:
    kw = {k: cfg[k] for k in _PARAM_KEYS if k in cfg and cfg[k] is not None}
    kw.update(overrides)
    try:
        return SystemParams(**kw)
    except (TypeError, ValueError) as exc:
        raise ConfigError(str(exc)) from exc


def _fmt(v) -> str:
    if isinstance(v, (int, np.integer)) and not isinstance(v, bool):
        return str(int(v))
    return repr(float(v))


def _write_csv(path: str, columns, rows, config: dict, int_cols=()):
    lines = [
        "# config: " + json.dumps(config, sort_keys=True),
        f"# version: atomlaser {__version__}",
        ",".join(columns),
    ]
    for row in rows:
        lines.append(
            ",".join(
                str(int(v)) if i in int_cols else _fmt(v)
                for i, v in enumerate(row)
            )
        )
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("\n".join(lines) + "\n")


def _sibling(path: str, tag: str) -> str:
    root, ext = os.path.splitext(path)
    return f"{root}.{tag}" if ext == ".csv" else f"{path}.{tag}"


def _pool_map(worker, tasks, threads: int):
    tasks = list(tasks)
    if threads <= 1 or len(tasks) <= 1:
        return [worker(t) for t in tasks]
    with ProcessPoolExecutor(max_workers=min(threads, len(tasks))) as pool:
        return list(pool.map(worker, tasks))


# ---------------------------------------------------------------- steady

def _steady_block(task):
    pdict, xs = task
    params = SystemParams(**pdict)
    xs = np.asarray(xs)
    G = coupling(params, xs)
    u = G * G
    lamb_states = [_lamb.lamb_steady_state(params, float(x)) for x in xs]
    n_lamb = np.array([st.photons for st in lamb_states])
    z_lamb = np.array([st.z for st in lamb_states])
    f_lamb = _lamb.force_lamb(params, xs)
    Z = _moments.solve_inversion(params, u)
    det = _moments.det4(params, u, Z)
    N = params.nu * params.total_width * u / det
    P = 0.5 * (1.0 + Z)
    F = _moments.mean_force(params, xs)
    U = _motion.potential(params, xs)
    beta = _motion.friction(params, xs)
    dfield = _motion.diffusion_field(params, xs)
    drec = _motion.diffusion_recoil(params, xs)
    frac = xs / params.wavelength
    return np.column_stack(
        [frac, G, n_lamb, z_lamb, f_lamb, N, P, Z, F, U, beta, dfield, drec]
    )


def cmd_steady(cfg: dict, threads: int):
    if cfg["x_points"] < 2:
        raise ConfigError("x_points must be at least 2")
    params = _params_from(cfg)
    xs = np.linspace(0.0, 0.5 * params.wavelength, cfg["x_points"])
    deltas = cfg["delta_values"]
    columns = [
        "x/lambda", "G", "N_lamb", "z_lamb", "F_lamb",
        "N", "P", "Z", "F", "U", "beta", "Dfield", "Drec",
    ]
    tasks = []
    if deltas is None:
        pdict = _params_dict(params)
        for chunk in np.array_split(xs, max(1, min(threads, len(xs)))):
            if len(chunk):
                tasks.append((pdict, chunk))
        blocks = _pool_map(_steady_block, tasks, threads)
        rows = np.vstack(blocks)
    else:
        for d in deltas:
            pdict = _params_dict(params.with_updates(delta=d))
            tasks.append((pdict, xs))
        blocks = _pool_map(_steady_block, tasks, threads)
        columns = ["delta"] + columns
        rows = np.vstack(
            [
                np.column_stack([np.full(len(xs), d), blk])
                for d, blk in zip(deltas, blocks)
            ]
        )
    return columns, rows


def _params_dict(params: SystemParams) -> dict:
    return {
        "gamma": params.gamma, "nu": params.nu, "g": params.g,
        "delta": params.delta, "kappa": params.kappa,
        "wavenumber": params.wavenumber, "recoil": params.recoil,
    }


# ----------------------------------------------------------- temperature

def _antinode_photons(params: SystemParams) -> float:
    u = params.g * params.g
    Z = _moments.solve_inversion(params, u)
    return params.nu * params.total_width * u / _moments.det4(params, u, Z)


def _solve_pump(params: SystemParams, target: float) -> SystemParams:
    """Adjust the pump rate so the antinode photon number hits `target`."""

    def f(nu: float) -> float:
        return _antinode_photons(params.with_updates(nu=nu)) - target

    lo = 1e-9
    hi = max(10.0 * params.gamma, 10.0 * params.kappa, 1.0)
    while f(hi) < 0.0:
        hi *= 10.0
        if hi > 1e9:
            raise RuntimeError(f"target photon number {target:g} unreachable")
    nu = brentq(f, lo, hi, xtol=1e-14, rtol=8.9e-16)
    solved = params.with_updates(nu=nu)
    resid = abs(_antinode_photons(solved) - target)
    if resid > 1e-8:
        raise RuntimeError(f"pump solve residual {resid:.3g} exceeds 1e-8")
    return solved


def _temperature_point(task):
    pdict, axis, value, target, geometry = task
    params = SystemParams(**dict(pdict, **{axis: value}))
    if target is not None:
        params = _solve_pump(params, target)
    eq = _motion.equilibrium_temperature(params, recoil_geometry=geometry)
    row = [value]
    if axis != "nu":
        row.append(params.nu)
    row += [
        eq.depth, eq.beta_avg,
        eq.kT / params.gamma, eq.kT / params.kappa,
        eq.ratio, int(not eq.cooling),
    ]
    return row


def cmd_temperature(cfg: dict, threads: int):
    axis = cfg["sweep"]
    if axis not in ("delta", "g", "nu"):
        raise ConfigError("sweep must be one of: delta, g, nu")
    target = cfg["target_max_photons"]
    if target is not None and axis == "nu":
        raise ConfigError("cannot sweep nu while solving it for a photon target")
    if target is None and cfg["nu"] is None and axis != "nu":
        raise ConfigError("nu is required unless swept or solved for a target")
    base = dict(cfg)
    if base["nu"] is None:
        base["nu"] = 1.0  # placeholder, replaced per point
    params = _params_from(base)
    pdict = _params_dict(params)
    tasks = [(pdict, axis, v, target, 1.0) for v in cfg["sweep_values"]]
    rows = _pool_map(_temperature_point, tasks, threads)
    columns = [axis] + (["nu"] if axis != "nu" else []) + [
        "V", "beta_avg", "kT/hgamma", "kT/hkappa", "E/V", "heating",
    ]
    return columns, rows


# ------------------------------------------------------------ trajectory

def _trajectory_chunk(task):
    (pdict, x0, p0, count, seed, dt, t_end, mode, sample_every,
     model, geometry, offset) = task
    params = SystemParams(**pdict)
    trajs = _stoch.simulate_ensemble(
        params, (x0, p0), count, seed, dt, t_end,
        mode=mode, sample_every=sample_every, model=model,
        recoil_geometry=geometry, traj_offset=offset,
    )
    return [(tr.t, tr.x, tr.p, tr.photons, tr.inversion) for tr in trajs]


def cmd_trajectory(cfg: dict, threads: int):
    params = _params_from(cfg)
    n_traj = cfg["n_traj"]
    if n_traj < 1:
        raise ConfigError("n_traj must be at least 1")
    if not 0.0 < cfg["window"] <= 1.0:
        raise ConfigError("window must be in (0, 1]")
    if not 0 <= cfg["seed"] < 2**64:
        raise ConfigError("seed must fit in an unsigned 64-bit integer")
    pdict = _params_dict(params)
    counts = [len(c) for c in np.array_split(np.arange(n_traj), min(threads, n_traj))]
    tasks, offset = [], 0
    for count in counts:
        if count == 0:
            continue
        tasks.append(
            (pdict, cfg["x0"], cfg["p0"], count, cfg["seed"], cfg["dt"],
             cfg["t_end"], cfg["mode"], cfg["sample_every"], cfg["model"],
             cfg["recoil_geometry"], offset)
        )
        offset += count
    try:
        chunks = _pool_map(_trajectory_chunk, tasks, threads)
    except ValueError as exc:
        raise RuntimeError(str(exc)) from exc

    from .trajectory import Trajectory

    blocks, trajs, idx = [], [], 0
    for chunk in chunks:
        for t, x, p, photons, inversion in chunk:
            blocks.append(
                np.column_stack([np.full(len(t), idx), t, x, p, photons, inversion])
            )
            trajs.append(
                Trajectory(
                    t=t, x=x, p=p, photons=photons, inversion=inversion,
                    mode=cfg["mode"], dt=cfg["dt"], seed=cfg["seed"],
                    meta={"wavelength": params.wavelength, "mass": params.mass},
                )
            )
            idx += 1
    stats = _stoch.ensemble_stats(trajs, cfg["window"])
    columns = ["traj", "t", "x", "p", "N", "Z"]
    return columns, np.vstack(blocks), stats


# ------------------------------------------------------------ goodcavity

def cmd_goodcavity(cfg: dict):
    ys = cfg["y_values"]
    if cfg["a_values"] is not None:
        a_grid = list(cfg["a_values"])
    else:
        if cfg["a_points"] < 2 or cfg["a_min"] <= 0 or cfg["a_max"] <= cfg["a_min"]:
            raise ConfigError("need a_points >= 2 and 0 < a_min < a_max")
        a_grid = list(np.linspace(cfg["a_min"], cfg["a_max"], cfg["a_points"]))
    main_rows = [
        [y, a, _gc.gc_temperature(_gc.OperatingPoint(a=a, y=y))]
        for y in ys
        for a in a_grid
    ]
    minima_rows = []
    for y in ys:
        t_min, a_star = _gc.gc_min_temperature(y)
        minima_rows.append([y, t_min, a_star])
    errs = _gc.gc_convergence_check(cfg["conv_y"], cfg["conv_a"], cfg["conv_ratios"])
    conv_rows = [
        [cfg["conv_y"], cfg["conv_a"], ratio, err]
        for ratio, err in zip(cfg["conv_ratios"], errs)
    ]
    return (
        (["y", "a", "kT/hkappa"], main_rows),
        (["y", "kT_min/hkappa", "a_star"], minima_rows),
        (["y", "a", "kappa_over_nu", "rel_err"], conv_rows),
    )


# ------------------------------------------------------------------ main

def _add_common_flags(sp: argparse.ArgumentParser, command: str):
    sp.add_argument("--config", metavar="FILE", help="JSON config file")
    sp.add_argument("--out", metavar="PATH", help="output CSV path")
    sp.add_argument("--seed", type=int, metavar="U64", help="RNG seed")
    sp.add_argument("--threads", type=int, metavar="N",
                    help="worker processes (default: all cores)")
    sp.add_argument("--plot", default=True, action=argparse.BooleanOptionalAction,
                    help="render figures next to the CSV")
    for key, (typ, _) in _SCHEMAS[command].items():
        if typ is list or key == "seed":
            continue
        flag = "--" + key.replace("_", "-")
        sp.add_argument(flag, dest=key, type=typ, default=None,
                        help=argparse.SUPPRESS)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="atomlaser",
        description="Steady states, transport coefficients, and trajectories "
        "of a single pumped atom lasing in a cavity.",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    helps = {
        "steady": "per-position steady-state table (both models)",
        "temperature": "equilibrium temperature sweep",
        "trajectory": "deterministic or stochastic trajectories",
        "goodcavity": "long-lived-cavity temperature limit tables",
        "selftest": "run the built-in oracle and invariant suite",
    }
    for name in _SCHEMAS:
        sp = sub.add_parser(name, help=helps[name])
        _add_common_flags(sp, name)
    return parser


def _effective_threads(args) -> int:
    if args.threads is not None:
        if args.threads < 1:
            raise ConfigError("threads must be at least 1")
        return args.threads
    return os.cpu_count() or 1


def _maybe_plot(args, name: str, *render_args):
    if not args.plot:
        return
    from . import plots

    out = args.out or _DEFAULT_OUT[args.command]
    fig_path = os.path.splitext(out)[0] + ".png"
    getattr(plots, "render_" + name)(fig_path, *render_args)


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if args.command == "selftest":
            ok = run_selftest()
            return 0 if ok else 1
        cfg = resolve_config(args.command, args)
        threads = _effective_threads(args)
        out = args.out or _DEFAULT_OUT[args.command]
        echo = {"command": args.command, **cfg}

        if args.command == "steady":
            columns, rows = cmd_steady(cfg, threads)
            _write_csv(out, columns, rows, echo)
            _maybe_plot(args, "steady", columns, rows)
        elif args.command == "temperature":
            columns, rows = cmd_temperature(cfg, threads)
            _write_csv(out, columns, rows, echo)
            _maybe_plot(args, "temperature", columns, rows)
        elif args.command == "trajectory":
            columns, rows, stats = cmd_trajectory(cfg, threads)
            _write_csv(out, columns, rows, echo, int_cols={0})
            stats_doc = {
                "kT_emp": stats.kT_emp, "kT_se": stats.kT_se,
                "loc": stats.loc, "loc_se": stats.loc_se,
                "n_traj": stats.n_traj, "window": stats.window,
                "config": echo, "version": __version__,
            }
            with open(_sibling(out, "stats.json"), "w", encoding="utf-8") as fh:
                json.dump(stats_doc, fh, sort_keys=True, indent=2)
                fh.write("\n")
            _maybe_plot(args, "trajectory", columns, rows)
        elif args.command == "goodcavity":
            main_tab, minima_tab, conv_tab = cmd_goodcavity(cfg)
            _write_csv(out, main_tab[0], main_tab[1], echo)
            _write_csv(_sibling(out, "minima.csv"), minima_tab[0], minima_tab[1], echo)
            _write_csv(
                _sibling(out, "convergence.csv"), conv_tab[0], conv_tab[1], echo
            )
            _maybe_plot(args, "goodcavity", main_tab, minima_tab, conv_tab)
        return 0
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except (RuntimeError, ValueError, _moments.NoPhysicalRootError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())

"""Figure rendering for the CLI report path.

Each renderer takes the already-assembled table (columns, rows) and saves
a PNG next to the CSV.  Matplotlib is imported lazily with the Agg
backend so the computational modules stay import-light and the CLI works
headless; pass --no-plot to skip rendering entirely.
"""

from __future__ import annotations

import numpy as np


def _plt():
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    return plt


def _col(columns, rows, name):
    arr = np.asarray(rows, dtype=float)
    return arr[:, list(columns).index(name)]


def render_steady(path: str, columns, rows):
    plt = _plt()
    rows = np.asarray(rows, dtype=float)
    has_delta = columns[0] == "delta"
    fig, axes = plt.subplots(2, 3, figsize=(12, 6), sharex=True)
    (ax_n, ax_z, ax_f), (ax_u, ax_b, ax_d) = axes

    def one_block(block, label=None):
        x = _col(columns, block, "x/lambda")
        ax_n.plot(x, _col(columns, block, "N"), label=label)
        ax_n.plot(x, _col(columns, block, "N_lamb"), ls="--", color="gray", lw=0.8)
        ax_z.plot(x, _col(columns, block, "Z"))
        ax_z.plot(x, _col(columns, block, "z_lamb"), ls="--", color="gray", lw=0.8)
        ax_f.plot(x, _col(columns, block, "F"))
        ax_f.plot(x, _col(columns, block, "F_lamb"), ls="--", color="gray", lw=0.8)
        ax_u.plot(x, _col(columns, block, "U"))
        ax_b.plot(x, _col(columns, block, "beta"))
        ax_d.plot(x, _col(columns, block, "Dfield"))
        ax_d.plot(x, _col(columns, block, "Drec"), ls=":")

    if has_delta:
        deltas = np.unique(rows[:, 0])
        for d in deltas[:6]:
            one_block(rows[rows[:, 0] == d], label=f"delta={d:g}")
        ax_n.legend(fontsize=7)
    else:
        one_block(rows)
    ax_n.set_ylabel("photons")
    ax_z.set_ylabel("inversion")
    ax_f.set_ylabel("force")
    ax_u.set_ylabel("potential")
    ax_b.set_ylabel("friction")
    ax_d.set_ylabel("diffusion")
    for ax in (ax_u, ax_b, ax_d):
        ax.set_xlabel("x/lambda")
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)


def render_temperature(path: str, columns, rows):
    plt = _plt()
    axis = columns[0]
    x = _col(columns, rows, axis)
    kt_g = _col(columns, rows, "kT/hgamma")
    kt_k = _col(columns, rows, "kT/hkappa")
    ev = _col(columns, rows, "E/V")
    heating = _col(columns, rows, "heating") > 0.5

    fig, (ax1, ax2) = plt.subplots(1, 2, figsize=(9, 3.6))
    cool = ~heating & np.isfinite(kt_g)
    ax1.plot(x[cool], kt_g[cool], "o-", ms=3, label="kT per atomic width")
    ax1.plot(x[cool], kt_k[cool], "s-", ms=3, label="kT per cavity width")
    if heating.any():
        ax1.plot(x[heating], np.full(heating.sum(), ax1.get_ylim()[0]), "x",
                 color="red", label="heating")
    ax1.axhline(1.0, color="gray", lw=0.8, ls="--")
    ax1.set_xlabel(axis)
    ax1.set_yscale("log")
    ax1.legend(fontsize=8)
    ax2.plot(x[cool], ev[cool], "o-", ms=3)
    ax2.axhline(1.0, color="gray", lw=0.8, ls="--")
    ax2.set_xlabel(axis)
    ax2.set_ylabel("mean energy / well depth")
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)


def render_trajectory(path: str, columns, rows, max_shown: int = 3):
    plt = _plt()
    rows = np.asarray(rows, dtype=float)
    ids = np.unique(rows[:, 0]).astype(int)
    fig, (ax_x, ax_n) = plt.subplots(2, 1, figsize=(8, 5), sharex=True)
    for i in ids[:max_shown]:
        block = rows[rows[:, 0] == i]
        t = _col(columns, block, "t")
        ax_x.plot(t, _col(columns, block, "x"), lw=0.8)
        ax_n.plot(t, _col(columns, block, "N"), lw=0.8)
    ax_x.set_ylabel("position")
    ax_n.set_ylabel("photons")
    ax_n.set_xlabel("time")
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)


def render_goodcavity(path: str, main_tab, minima_tab, conv_tab):
    plt = _plt()
    (m_cols, m_rows) = main_tab
    (mn_cols, mn_rows) = minima_tab
    (c_cols, c_rows) = conv_tab
    m_rows = np.asarray(m_rows, dtype=float)
    fig, (ax1, ax2, ax3) = plt.subplots(1, 3, figsize=(12, 3.6))
    for y in np.unique(m_rows[:, 0]):
        block = m_rows[m_rows[:, 0] == y]
        ax1.plot(_col(m_cols, block, "a"), _col(m_cols, block, "kT/hkappa"),
                 label=f"y={y:g}")
    ax1.set_xlabel("a")
    ax1.set_ylabel("kT per cavity width")
    ax1.set_yscale("log")
    ax1.legend(fontsize=7)
    ys = _col(mn_cols, mn_rows, "y")
    ax2.plot(ys, _col(mn_cols, mn_rows, "kT_min/hkappa"), "o-", ms=3)
    ax2.set_xlabel("y")
    ax2.set_ylabel("minimum kT")
    ax3.loglog(_col(c_cols, c_rows, "kappa_over_nu"),
               _col(c_cols, c_rows, "rel_err"), "o-", ms=3)
    ax3.set_xlabel("cavity/pump rate ratio")
    ax3.set_ylabel("relative error vs limit")
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)

"""Figure rendering for the report path.

One figure per CLI report, written next to the CSV/JSON artifacts.  The
style setup keeps matplotlib headless and print-friendly.
"""

from __future__ import annotations

from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

FIG_SIZE = (6.0, 3.7)


def _style():
    plt.rcParams.update({
        "font.size": 9,
        "axes.grid": True,
        "grid.alpha": 0.3,
        "figure.figsize": FIG_SIZE,
        "savefig.dpi": 150,
        "savefig.bbox": "tight",
    })


def _save(fig, out_dir, name) -> Path:
    path = Path(out_dir) / name
    path.parent.mkdir(parents=True, exist_ok=True)
    fig.savefig(path)
    plt.close(fig)
    return path


def spectrum_figure(out_dir, grid, V_values, Y_values, kappa) -> Path:
    _style()
    fig, (ax1, ax2) = plt.subplots(1, 2, figsize=(8.0, 3.2))
    sel = grid.r <= 12
    ax1.plot(grid.r[sel], V_values[sel], color="C3")
    ax1.set_xlabel("r")
    ax1.set_ylabel("V(r)")
    ax1.set_title("linearization potential")
    sel2 = (grid.r <= 25) & (np.abs(Y_values) > 1e-15)
    ax2.semilogy(grid.r[sel2], np.abs(Y_values[sel2]), color="C0",
                 label="|Y(r)|")
    ax2.semilogy(grid.r[sel2],
                 np.abs(Y_values).max() * np.exp(-kappa * grid.r[sel2]),
                 "--", color="C1", label=f"exp(-{kappa:.3f} r)")
    ax2.set_xlabel("r")
    ax2.legend()
    ax2.set_title("bound state decay")
    return _save(fig, out_dir, "spectrum.png")


def jost_figure(out_dir, rho, abs_f0, bound_ratios) -> Path:
    _style()
    fig, (ax1, ax2) = plt.subplots(1, 2, figsize=(8.0, 3.2))
    ax1.plot(rho, abs_f0, color="C0", label="|f(0, rho)|")
    ax1.plot(rho, rho / (1 + rho), "--", color="C2",
             label="rho/(1+rho) shape")
    ax1.set_xlabel("rho")
    ax1.legend()
    ax1.set_title("Jost function at the origin")
    names = list(bound_ratios)
    ax2.bar(range(len(names)), [bound_ratios[k] for k in names])
    ax2.set_xticks(range(len(names)), names, rotation=20)
    ax2.set_title("fitted symbol-bound constants")
    return _save(fig, out_dir, "jost.png")


def dft_figure(out_dir, ks, bernstein_ratios, lp_constants) -> Path:
    _style()
    fig, (ax1, ax2) = plt.subplots(1, 2, figsize=(8.0, 3.2))
    ax1.loglog(ks, bernstein_ratios, "o-", color="C0", label="measured")
    ax1.loglog(ks, bernstein_ratios[0] * (np.asarray(ks) / ks[0]),
               "--", color="C1", label="slope 1")
    ax1.set_xlabel("k")
    ax1.set_ylabel("sup norm / L2 norm")
    ax1.legend()
    ax1.set_title("band Bernstein growth")
    ax2.plot(ks, lp_constants, "s-", color="C2")
    ax2.set_xlabel("k")
    ax2.set_ylim(0, max(lp_constants) * 1.3)
    ax2.set_title("L^2.5 projection constants")
    return _save(fig, out_dir, "dft_check.png")


def kernel_figure(out_dir, per_k_sup, cone_sup) -> Path:
    _style()
    fig, ax = plt.subplots()
    ks = sorted(per_k_sup)
    ax.plot(ks, [per_k_sup[k] for k in ks], "o-", color="C0")
    ax.set_xlabel("band k")
    ax.set_ylabel("sup |K_k| / envelope")
    title = "kernel decay certification"
    if cone_sup is not None:
        title += f"  (inside-cone sup {cone_sup:.1f})"
    ax.set_title(title)
    ax.set_ylim(0, max(per_k_sup.values()) * 1.3)
    return _save(fig, out_dir, "kernel_check.png")


def randomize_figure(out_dir, norms) -> Path:
    _style()
    fig, ax = plt.subplots()
    ax.hist(norms, bins=30, color="C0", alpha=0.8)
    ax.set_xlabel("draw Sobolev norm")
    ax.set_ylabel("count")
    ax.set_title("randomized data norms")
    return _save(fig, out_dir, "randomize.png")


def evolve_figure(out_dir, times, component_table) -> Path:
    _style()
    fig, ax = plt.subplots()
    for name, vals in component_table.items():
        ax.plot(times, vals, label=name)
    ax.set_xlabel("t")
    ax.legend(fontsize=7)
    ax.set_title("field norms along the flow")
    return _save(fig, out_dir, "evolve.png")


def tails_figure(out_dir, fit) -> Path:
    _style()
    fig, ax = plt.subplots()
    x = fit.lambdas**2
    ax.semilogy(x, fit.empirical_tail, "o", color="C0", label="empirical")
    ax.semilogy(x, fit.C_fit * np.exp(-fit.c_fit * x / fit.x_s_norm**2), "--",
                color="C1", label="gaussian fit")
    ax.set_xlabel("lambda^2")
    ax.set_ylabel("P(norm > lambda)")
    ax.set_title(f"Z-norm tail (R^2 = {fit.r_squared:.3f})")
    ax.legend()
    return _save(fig, out_dir, "tails.png")


def modulate_figure(out_dir, state) -> Path:
    _style()
    ts = state.v.times
    fig, (ax1, ax2) = plt.subplots(1, 2, figsize=(8.0, 3.2))
    ax1.plot(ts, state.a, color="C0", label="a(t)")
    ax1.axhline(1.0, color="0.5", lw=0.8)
    ax1.set_xlabel("t")
    ax1.legend()
    ax1.set_title("scale path")
    ax2.plot(ts, state.x_plus, label="x_+", color="C1")
    ax2.plot(ts, state.x_minus, label="x_-", color="C2")
    ax2.set_xlabel("t")
    ax2.legend()
    ax2.set_title("bound-state coefficients")
    return _save(fig, out_dir, "modulate.png")

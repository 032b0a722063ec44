"""Figure rendering for the report path (headless matplotlib)."""
from __future__ import annotations

import matplotlib
matplotlib.use("Agg")
import matplotlib.pyplot as plt
import numpy as np


def scar_overlap_figure(table, title: str = ""):
    """Squared trial/ladder-route overlaps per tower index."""
    fig, ax = plt.subplots(figsize=(5.2, 3.6))
    ns = sorted(r.n for r in table.rows)
    rows = table.by_n()
    ax.plot(ns, [rows[n].overlap2_trial for n in ns], "o-",
            label="trial", color="tab:blue")
    if any(rows[n].overlap2_mps is not None for n in ns):
        ax.plot(ns, [rows[n].overlap2_mps for n in ns], "s--",
                label="mps", color="tab:orange")
    ax.set_xlabel("tower index $n$")
    ax.set_ylabel(r"$|\langle\mathrm{trial}_n|\mathrm{eig}\rangle|^2$")
    ax.set_ylim(-0.02, 1.02)
    ax.legend(frameon=False)
    if title:
        ax.set_title(title)
    fig.tight_layout()
    return fig


def spectrum_figure(spectrum_rows: np.ndarray, scar_energies=None,
                    title: str = ""):
    """Reference-state overlap fan over the full spectrum (log scale)."""
    fig, ax = plt.subplots(figsize=(5.2, 3.6))
    e, ov = spectrum_rows[:, 1], spectrum_rows[:, 2]
    ax.scatter(e, np.maximum(ov, 1e-16), s=4, alpha=0.4, color="tab:gray")
    if scar_energies:
        for en in scar_energies:
            ax.axvline(en, color="tab:red", lw=0.4, alpha=0.5)
    ax.set_yscale("log")
    ax.set_xlabel("$E$")
    ax.set_ylabel(r"$|\langle Z_2 | E \rangle|^2$")
    if title:
        ax.set_title(title)
    fig.tight_layout()
    return fig


def fidelity_figure(times, fidelity, title: str = ""):
    fig, ax = plt.subplots(figsize=(5.2, 3.2))
    ax.plot(times, fidelity, lw=1.0)
    ax.set_xlabel("$t$")
    ax.set_ylabel("fidelity")
    ax.set_ylim(-0.02, 1.05)
    if title:
        ax.set_title(title)
    fig.tight_layout()
    return fig


def objective_figure(grid, values, minimizer=None, title: str = ""):
    fig, ax = plt.subplots(figsize=(5.2, 3.2))
    ax.plot(grid, values, "o-", ms=3)
    if minimizer is not None:
        ax.axvline(minimizer, color="tab:red", lw=1.0,
                   label=f"$\\lambda^*={minimizer:.3f}$")
        ax.legend(frameon=False)
    ax.set_xlabel(r"$\lambda$")
    ax.set_ylabel("residual objective")
    if title:
        ax.set_title(title)
    fig.tight_layout()
    return fig


def save(fig, path) -> None:
    fig.savefig(path, dpi=160)
    plt.close(fig)

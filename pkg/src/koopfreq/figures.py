"""Figure rendering for the CLI report paths.

Every figure is redrawable from the delimited data files emitted next to
it; the PNGs exist for quick inspection, not as data carriers.  matplotlib
is imported lazily so library use never pays for it.
"""

from __future__ import annotations

from pathlib import Path

import numpy as np


def _plt():
    import matplotlib

    matplotlib.use("Agg", force=False)
    import matplotlib.pyplot as plt

    return plt


def render_sigma_convergence(path, n_values, m_values_per_n, sigma, max_modes: int = 4) -> None:
    """Renormalized-eigenvalue convergence: one panel per mode index,
    sigma vs M (log x), one line per N."""
    plt = _plt()
    top_k = sigma[0].shape[1]
    modes = min(max_modes, top_k)
    fig, axes = plt.subplots(1, modes, figsize=(3.2 * modes, 3.0), sharey=False, squeeze=False)
    for i in range(modes):
        ax = axes[0, i]
        for k, n in enumerate(n_values):
            ms = m_values_per_n[k]
            ax.plot(ms, sigma[k][:, i], marker="o", markersize=3, label=f"N={n}")
        ax.set_xscale("log")
        ax.set_xlabel("M")
        ax.set_title(f"mode {i}")
        if i == 0:
            ax.set_ylabel("eigenvalue / (N+1)")
            ax.legend(fontsize=8)
    fig.tight_layout()
    fig.savefig(Path(path), dpi=120)
    plt.close(fig)


def render_yosida_curve(path, curve, omega: float) -> None:
    """Energy of the running mean-ergodic average vs horizon T (log x)."""
    plt = _plt()
    ts = [t for t, _ in curve]
    energy = [abs(a) ** 2 for _, a in curve]
    fig, ax = plt.subplots(figsize=(4.8, 3.2))
    ax.plot(ts, energy, marker="o", markersize=3)
    ax.set_xscale("log")
    ax.set_xlabel("T")
    ax.set_ylabel(r"$|a_\omega|^2$")
    ax.set_title(f"mean-ergodic energy at {omega:g} cycles/step")
    fig.tight_layout()
    fig.savefig(Path(path), dpi=120)
    plt.close(fig)


def render_yosida_spectrum(path, omegas, energies) -> None:
    """|a_omega|^2 across a scanned frequency range."""
    plt = _plt()
    fig, ax = plt.subplots(figsize=(4.8, 3.2))
    ax.plot(omegas, energies)
    ax.set_xlabel("frequency (cycles/step)")
    ax.set_ylabel(r"$|a_\omega|^2$")
    fig.tight_layout()
    fig.savefig(Path(path), dpi=120)
    plt.close(fig)


def render_map(path, values: np.ndarray, title: str = "") -> None:
    """Per-cell magnitude heat map; NaN cells render blank."""
    plt = _plt()
    fig, ax = plt.subplots(figsize=(4.8, 4.0))
    im = ax.imshow(values, origin="lower", aspect="auto")
    ax.set_xlabel("ix")
    ax.set_ylabel("iy")
    if title:
        ax.set_title(title)
    fig.colorbar(im, ax=ax, shrink=0.85)
    fig.tight_layout()
    fig.savefig(Path(path), dpi=120)
    plt.close(fig)

"""PNG figures written next to the CSV/JSON outputs of the CLI."""

from __future__ import annotations

from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

__all__ = ["plot_dispersion", "plot_convergence", "plot_wavefield", "plot_traces"]

STYLE = {
    "font.size": 9,
    "axes.labelsize": 10,
    "legend.fontsize": 8,
    "lines.linewidth": 1.2,
    "figure.dpi": 120,
    "savefig.bbox": "tight",
}


def _save(fig, path) -> Path:
    path = Path(path)
    fig.savefig(path)
    plt.close(fig)
    return path


def plot_dispersion(inv_G, curves: dict, path, ylabel="v_ph / v", title=None) -> Path:
    """One line per ``label -> ratio`` entry against ``1/G``."""
    with plt.rc_context(STYLE):
        fig, ax = plt.subplots(figsize=(5, 3.5))
        for label, y in curves.items():
            ax.plot(inv_G, y, label=label)
        ax.set_xlabel("1/G")
        ax.set_ylabel(ylabel)
        if title:
            ax.set_title(title)
        ax.legend()
        ax.grid(alpha=0.3)
        return _save(fig, path)


def plot_convergence(rows: list[dict], path) -> Path:
    """C-norm error against ``h`` on log axes, one line per scheme."""
    with plt.rc_context(STYLE):
        fig, ax = plt.subplots(figsize=(5, 3.5))
        for scheme in dict.fromkeys(r["scheme"] for r in rows):
            sub = [r for r in rows if r["scheme"] == scheme]
            ax.loglog([r["h"] for r in sub], [r["error"] for r in sub], "o-", label=scheme)
        ax.set_xlabel("h")
        ax.set_ylabel("C-norm error")
        ax.legend()
        ax.grid(alpha=0.3, which="both")
        return _save(fig, path)


def plot_wavefield(values, extent, path, title=None, clip=None) -> Path:
    """Image of a real field; ``extent = (x_min, x_max, z_min, z_max)``, z downward."""
    values = np.asarray(values, float)
    vmax = clip if clip is not None else np.max(np.abs(values)) or 1.0
    with plt.rc_context(STYLE):
        fig, ax = plt.subplots(figsize=(5, 4.5))
        x0, x1, z0, z1 = extent
        im = ax.imshow(values, extent=(x0, x1, z1, z0), cmap="seismic",
                       vmin=-vmax, vmax=vmax, aspect="equal")
        fig.colorbar(im, ax=ax, shrink=0.8)
        ax.set_xlabel("x (m)")
        ax.set_ylabel("z (m)")
        if title:
            ax.set_title(title)
        return _save(fig, path)


def plot_traces(times, traces: dict, path, title=None) -> Path:
    """Overlay of ``label -> values`` traces."""
    with plt.rc_context(STYLE):
        fig, ax = plt.subplots(figsize=(6, 3))
        for label, y in traces.items():
            ax.plot(times, y, label=label)
        ax.set_xlabel("t (s)")
        ax.set_ylabel("amplitude")
        if title:
            ax.set_title(title)
        ax.legend()
        ax.grid(alpha=0.3)
        return _save(fig, path)

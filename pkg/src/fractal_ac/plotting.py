"""Optional figure rendering for region sweeps and convergence runs."""
from __future__ import annotations

from pathlib import Path

import numpy as np


def _pyplot():
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    return plt


def plot_region(rows, path, circuit: str) -> None:
    """Shade the filter region of a sweep (r against omega^2 LC)."""
    plt = _pyplot()
    fig, ax = plt.subplots(figsize=(5, 4))
    if circuit == "fsl":
        x = np.array([row[2] for row in rows])
        y = np.array([1.0 if row[3] else 0.0 for row in rows])
        ax.fill_between(x, 0, y, step="mid", color="0.6")
        ax.set_xlabel(r"$\omega^2 LC$")
        ax.set_yticks([0, 1], ["no", "filter"])
    else:
        rs = sorted({row[1] for row in rows})
        ws = sorted({row[2] for row in rows})
        grid = np.zeros((len(ws), len(rs)))
        ri = {v: i for i, v in enumerate(rs)}
        wi = {v: i for i, v in enumerate(ws)}
        for row in rows:
            grid[wi[row[2]], ri[row[1]]] = 1.0 if row[3] else 0.0
        ax.pcolormesh(rs, ws, grid, cmap="Greys", vmin=0, vmax=1.6, shading="nearest")
        ax.set_xlabel("$r$")
        ax.set_ylabel(r"$\omega^2 LC$")
    ax.set_title(f"{circuit}: filter region")
    fig.tight_layout()
    fig.savefig(Path(path), dpi=120, metadata={"Software": None})
    plt.close(fig)


def plot_convergence(blocks, path) -> None:
    """Distance to the fixed point against N, one line per epsilon."""
    plt = _pyplot()
    fig, ax = plt.subplots(figsize=(5, 4))
    for eps, dist in blocks:
        d = np.maximum(np.asarray(dist, dtype=float), 1e-18)
        ax.semilogy(np.arange(len(d)), d, label=f"eps={eps:g}")
    ax.set_xlabel("N")
    ax.set_ylabel(r"$|Z_N - Z_\mathrm{fixed}|$")
    ax.legend()
    fig.tight_layout()
    fig.savefig(Path(path), dpi=120, metadata={"Software": None})
    plt.close(fig)

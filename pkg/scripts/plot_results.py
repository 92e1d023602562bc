#!/usr/bin/env python3
"""Plot the CSV outputs of `qwfluor spectrum` and `qwfluor sweep`.

Usage:
    python scripts/plot_results.py <spectrum_dir> [sweep_dir]

Example only; the package itself never imports matplotlib.
"""

import sys
from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt
import numpy as np


def load_spectrum(path: Path):
    data = np.loadtxt(path, delimiter=",", skiprows=3)
    return data[:, 0], data[:, 1]


def plot_spectrum(outdir: Path) -> None:
    fig, ax = plt.subplots(figsize=(7, 4.2))
    om, sx = load_spectrum(outdir / "spectrum_x.csv")
    _, sq = load_spectrum(outdir / "spectrum_q.csv")
    _, a = load_spectrum(outdir / "absorption.csv")
    ax.plot(om, sx / sx.max(), "b--", label="source emission (norm.)")
    ax.plot(om, a / a.max(), "g-.", label="absorption (norm.)")
    ax.plot(om, sq / sq.max(), "r-", label="detected emission (norm.)")
    ax.set_xlabel("rotating-frame frequency (meV)")
    ax.set_ylabel("normalized spectra")
    ax.set_xlim(-1.0, 1.0)
    ax.legend()
    fig.tight_layout()
    fig.savefig(outdir / "spectra.png", dpi=150)
    print(f"wrote {outdir / 'spectra.png'}")


def plot_sweep(outdir: Path) -> None:
    path = outdir / "sweep.csv"
    names = path.read_text().splitlines()[0].split(",")
    data = np.loadtxt(path, delimiter=",", skiprows=1)
    col = {n: data[:, i] for i, n in enumerate(names)}
    p = col["power"]

    fig, axes = plt.subplots(2, 2, figsize=(10, 7), sharex=True)
    panels = [
        (axes[0, 0], [("coh_x", "b--"), ("coh_q", "r-")], "coherent intensity"),
        (axes[0, 1], [("intensity_x", "b--"), ("intensity_q", "r-")], "intensity"),
        (axes[1, 0], [("var_x", "b--"), ("var_q", "r-")], "field variance"),
        (axes[1, 1], [("ncl_x", "b--"), ("ncl_q", "r-")], "intensity - |anomalous|"),
    ]
    for ax, series, title in panels:
        for name, style in series:
            ax.plot(p, col[name], style, label=name)
        if title.startswith(("field", "intensity -")):
            ax.axhline(0.0, color="k", lw=0.5)
        ax.set_title(title)
        ax.legend(fontsize=8)
    for ax in axes[1]:
        ax.set_xlabel("pump power (uW)")
    fig.tight_layout()
    fig.savefig(outdir / "sweep.png", dpi=150)
    print(f"wrote {outdir / 'sweep.png'}")

    fig2, ax2 = plt.subplots(figsize=(7, 4.2))
    ax2.plot(p, col["phase_mean_sq"], "k-", label="arg <A>^2")
    ax2.plot(p, col["phase_anom_x"], "b--", label="arg <A^2> source")
    ax2.plot(p, col["phase_anom_q"], "r-.", label="arg <A^2> detected")
    ax2.set_xlabel("pump power (uW)")
    ax2.set_ylabel("phase (rad)")
    ax2.legend()
    fig2.tight_layout()
    fig2.savefig(outdir / "phases.png", dpi=150)
    print(f"wrote {outdir / 'phases.png'}")


if __name__ == "__main__":
    if len(sys.argv) < 2:
        sys.exit(__doc__)
    spectrum_dir = Path(sys.argv[1])
    if (spectrum_dir / "spectrum_x.csv").exists():
        plot_spectrum(spectrum_dir)
    for arg in sys.argv[1:]:
        if (Path(arg) / "sweep.csv").exists():
            plot_sweep(Path(arg))

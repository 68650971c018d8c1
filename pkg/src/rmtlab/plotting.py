"""Optional figure rendering for CLI outputs (matplotlib, Agg backend)."""
from __future__ import annotations

import math
from pathlib import Path

import numpy as np

__all__ = ["figure_path", "plot_overlay", "plot_curve", "plot_samples"]


def _pyplot():
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    plt.rcParams.update({"font.size": 10, "axes.spines.top": False, "axes.spines.right": False})
    return plt


def figure_path(out) -> Path:
    """PNG path next to a data file: ``run.csv`` -> ``run.png``."""
    return Path(out).with_suffix(".png")


def _new_axes(plt, width=5.0):
    golden = (math.sqrt(5) - 1) / 2
    fig, ax = plt.subplots(figsize=(width, width * golden), dpi=120)
    return fig, ax


def plot_overlay(xs, hist, theory, path, width=None, xlabel="x", title=None) -> Path:
    """Histogram bars with the theoretical curve on top."""
    plt = _pyplot()
    xs = np.asarray(xs, dtype=float)
    if width is None:
        width = float(xs[1] - xs[0]) if xs.size > 1 else 1.0
    fig, ax = _new_axes(plt)
    ax.bar(xs, hist, width=width, color="0.8", edgecolor="0.55", linewidth=0.4, label="sampled")
    ax.plot(xs, theory, color="C3", lw=1.4, label="theory")
    ax.set_xlabel(xlabel)
    ax.set_ylabel("density")
    if title:
        ax.set_title(title)
    ax.legend(frameon=False)
    fig.tight_layout()
    fig.savefig(path)
    plt.close(fig)
    return Path(path)


def plot_curve(xs, ys, path, xlabel="x", ylabel="y", title=None) -> Path:
    plt = _pyplot()
    fig, ax = _new_axes(plt)
    ax.plot(xs, ys, color="C0", lw=1.4)
    ax.set_xlabel(xlabel)
    ax.set_ylabel(ylabel)
    if title:
        ax.set_title(title)
    fig.tight_layout()
    fig.savefig(path)
    plt.close(fig)
    return Path(path)


def plot_samples(values, path, bins=60, xlabel="x", title=None) -> Path:
    """Normalized histogram of raw samples."""
    plt = _pyplot()
    fig, ax = _new_axes(plt)
    ax.hist(np.asarray(values, dtype=float).ravel(), bins=bins, density=True, color="0.7", edgecolor="0.5",
            linewidth=0.3)
    ax.set_xlabel(xlabel)
    ax.set_ylabel("density")
    if title:
        ax.set_title(title)
    fig.tight_layout()
    fig.savefig(path)
    plt.close(fig)
    return Path(path)

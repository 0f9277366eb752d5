"""Figures for the report path.  matplotlib is imported only when a figure is drawn."""

from __future__ import annotations

from pathlib import Path

import numpy as np

from .core import Dataset, residuals

STYLE = {"LS": dict(color="tab:red", linestyle="--"),
         "LTS": dict(color="black", linestyle="-"),
         "LST": dict(color="tab:green", linestyle=":")}


def _pyplot():
    import matplotlib
    matplotlib.use("Agg")
    import matplotlib.pyplot as plt
    return plt


def fitted_residual_figure(d: Dataset, fits: dict, path) -> Path:
    """Fitted values against residuals, one panel per method; trimmed rows hollow."""
    plt = _pyplot()
    fig, axes = plt.subplots(1, len(fits), figsize=(4 * len(fits), 3.4), squeeze=False)
    for ax, (name, fit) in zip(axes[0], fits.items()):
        r = residuals(d, fit.beta)
        yhat = d.y - r
        kept = np.zeros(d.n, dtype=bool)
        kept[fit.retained] = True
        color = STYLE.get(name, {}).get("color", "tab:blue")
        ax.scatter(yhat[kept], r[kept], s=12, color=color, label="retained")
        ax.scatter(yhat[~kept], r[~kept], s=14, facecolors="none", edgecolors="gray",
                   label="trimmed")
        ax.axhline(0.0, color="0.6", linewidth=0.8)
        ax.set_title(name)
        ax.set_xlabel("fitted")
    axes[0][0].set_ylabel("residual")
    axes[0][0].legend(frameon=False, fontsize=8)
    fig.tight_layout()
    path = Path(path)
    fig.savefig(path, dpi=120)
    plt.close(fig)
    return path


def simple_regression_figure(d: Dataset, fits: dict, path) -> Path:
    """Scatter plot with one line per method; only for a single predictor."""
    if d.p != 2:
        raise ValueError("line plot needs exactly one predictor")
    plt = _pyplot()
    fig, ax = plt.subplots(figsize=(4.5, 4))
    ax.scatter(d.X[:, 0], d.y, s=16, color="0.3")
    xs = np.linspace(d.X[:, 0].min() - 0.5, d.X[:, 0].max() + 0.5, 50)
    for name, fit in fits.items():
        ax.plot(xs, fit.beta[0] + fit.beta[1] * xs, label=name, **STYLE.get(name, {}))
    ax.set_xlabel("x")
    ax.set_ylabel("y")
    ax.legend(frameon=False)
    fig.tight_layout()
    path = Path(path)
    fig.savefig(path, dpi=120)
    plt.close(fig)
    return path


def boxplot_figure(sq_dev: dict, path, title: str = "") -> Path:
    """Box plot of per-replication squared deviations by method."""
    plt = _pyplot()
    fig, ax = plt.subplots(figsize=(4.5, 4))
    names = list(sq_dev)
    ax.boxplot([sq_dev[m] for m in names], tick_labels=names)
    ax.set_ylabel(r"$\|\hat\beta - \beta_0\|^2$")
    if title:
        ax.set_title(title, fontsize=9)
    fig.tight_layout()
    path = Path(path)
    fig.savefig(path, dpi=120)
    plt.close(fig)
    return path

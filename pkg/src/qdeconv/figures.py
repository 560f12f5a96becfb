"""Matplotlib rendering of experiment curves and channel reports.

Figures are written straight to files (headless Agg backend); the CSV/JSON
outputs remain the machine-readable contract and figures are a side
product for quick inspection.
"""

from __future__ import annotations

from typing import Sequence

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

from .experiments import ChannelReport, CurvePoint, model_kind, model_params
from .operators import AXES

__all__ = ["render_decay_figure", "render_sweep_figure", "render_report_figure"]

_AXIS_LABEL = {"x": r"$\langle\sigma_x\rangle$",
               "y": r"$\langle\sigma_y\rangle$",
               "z": r"$\langle\sigma_z\rangle$"}


def _series(points: Sequence[CurvePoint], getter) -> np.ndarray:
    return np.array([getter(pt) for pt in points])


def render_decay_figure(points: Sequence[CurvePoint], path: str, title: str | None = None) -> None:
    """Noisy vs deconvolved <sigma_x> decay, plus single-channel references."""
    ms = _series(points, lambda p: p.abscissa)
    fig, ax = plt.subplots(figsize=(7, 4.5))
    ax.errorbar(
        ms,
        _series(points, lambda p: p.noisy["x"].mean),
        yerr=_series(points, lambda p: p.noisy["x"].std_error),
        fmt="o-",
        ms=3,
        capsize=2,
        label="decoherence (noisy)",
        color="tab:red",
    )
    ax.errorbar(
        ms,
        _series(points, lambda p: p.mitigated["x"].mean),
        yerr=_series(points, lambda p: p.mitigated["x"].std_error),
        fmt="s-",
        ms=3,
        capsize=2,
        label="deconvolved",
        color="tab:green",
    )
    for key, label, color in (
        ("dephasing_only", "dephasing only", "tab:blue"),
        ("damping_only", "damping only", "tab:orange"),
    ):
        if key in points[0].extras:
            ax.errorbar(
                ms,
                _series(points, lambda p: p.extras[key]),
                yerr=_series(points, lambda p: p.extras[key + "_err"]),
                fmt="^--",
                ms=3,
                capsize=2,
                alpha=0.7,
                label=label,
                color=color,
            )
    ax.axhline(1.0, color="black", lw=0.8, ls=":", label="ideal")
    ax.set_xlabel("circuit depth $m$")
    ax.set_ylabel(_AXIS_LABEL["x"])
    if title:
        ax.set_title(title)
    ax.legend(loc="lower left", fontsize=8)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)


def render_sweep_figure(points: Sequence[CurvePoint], path: str, title: str | None = None) -> None:
    """Per-axis noisy/mitigated/ideal curves against the rotation angle."""
    thetas = _series(points, lambda p: p.abscissa)
    fig, axs = plt.subplots(3, 1, figsize=(7, 8), sharex=True)
    for ax, axis in zip(axs, AXES):
        ax.errorbar(
            thetas,
            _series(points, lambda p: p.noisy[axis].mean),
            yerr=_series(points, lambda p: p.noisy[axis].std_error),
            fmt="o",
            ms=3,
            capsize=2,
            label="noisy",
            color="tab:red",
        )
        ax.errorbar(
            thetas,
            _series(points, lambda p: p.mitigated[axis].mean),
            yerr=_series(points, lambda p: p.mitigated[axis].std_error),
            fmt="s",
            ms=3,
            capsize=2,
            label="mitigated",
            color="tab:green",
        )
        ax.plot(thetas, _series(points, lambda p: p.ideal[axis]), "k:", lw=1, label="ideal")
        ax.set_ylabel(_AXIS_LABEL[axis])
        ax.legend(loc="upper right", fontsize=8)
    axs[-1].set_xlabel(r"rotation angle $\theta$")
    if title:
        axs[0].set_title(title)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)


def _ptm_heatmap(ax, ptm: np.ndarray, title: str) -> None:
    ptm = np.asarray(ptm)
    vmax = max(1.0, np.max(np.abs(ptm)))
    im = ax.imshow(ptm, cmap="RdBu_r", vmin=-vmax, vmax=vmax)
    labels = ["I", "X", "Y", "Z"]
    ax.set_xticks(range(4), labels)
    ax.set_yticks(range(4), labels)
    for i in range(4):
        for j in range(4):
            ax.text(j, i, f"{ptm[i, j]:.3g}", ha="center", va="center", fontsize=8)
    ax.set_title(title, fontsize=10)
    plt.colorbar(im, ax=ax, fraction=0.046)


def render_report_figure(report: ChannelReport, path: str) -> None:
    """PTM heatmaps of the channel and, when it exists, its inverse."""
    n_panels = 2 if report.invertible else 1
    fig, axs = plt.subplots(1, n_panels, figsize=(4.5 * n_panels, 4))
    axs = np.atleast_1d(axs)
    name = f"{model_kind(report.model)} {model_params(report.model)}"
    _ptm_heatmap(axs[0], report.ptm, f"PTM: {name}")
    if report.invertible:
        _ptm_heatmap(axs[1], report.inverse.ptm, "inverse PTM")
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)

"""Matplotlib rendering for the harness outputs.

Figures are written next to the delimited output files; PNG always, SVG
additionally on request.  Everything here is presentation only, no
numbers are computed in this module.
"""

from __future__ import annotations

import os

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402


def _save(fig, base: str, svg: bool) -> list:
    paths = [base + ".png"]
    fig.savefig(paths[0], dpi=150)
    if svg:
        paths.append(base + ".svg")
        fig.savefig(paths[1])
    plt.close(fig)
    return paths


def save_scatter(x, y, out_dir: str, name: str = "points", svg: bool = False) -> list:
    """Scatter of (x, y) samples, the classic picture of the banana-thin
    conditional band."""
    fig, ax = plt.subplots(figsize=(5.0, 4.0))
    ax.plot(x, y, ".", ms=2.5, alpha=0.6)
    ax.set_xlabel("x")
    ax.set_ylabel("y")
    fig.tight_layout()
    return _save(fig, os.path.join(out_dir, name), svg)


def save_acf_chain(values, out_dir: str, name: str = "acf", svg: bool = False) -> list:
    """ACF of a single chain as a stem-style line from lag 0."""
    fig, ax = plt.subplots(figsize=(5.0, 3.2))
    lags = range(len(values))
    ax.axhline(0.0, color="0.6", lw=0.8)
    ax.plot(lags, values, "o-", ms=3)
    ax.set_xlabel("lag")
    ax.set_ylabel("autocorrelation")
    ax.set_ylim(-0.1, 1.02)
    fig.tight_layout()
    return _save(fig, os.path.join(out_dir, name), svg)


def save_acf_comparison(curves: dict, out_dir: str, name: str = "acf", svg: bool = False) -> list:
    """Overlaid ACF curves, one per method label."""
    fig, ax = plt.subplots(figsize=(6.0, 4.0))
    ax.axhline(0.0, color="0.6", lw=0.8)
    for label, values in curves.items():
        ax.plot(range(len(values)), values, "-", lw=1.4, label=label)
    ax.set_xlabel("lag")
    ax.set_ylabel("autocorrelation of x")
    ax.set_ylim(-0.1, 1.02)
    ax.legend(fontsize=8)
    fig.tight_layout()
    return _save(fig, os.path.join(out_dir, name), svg)

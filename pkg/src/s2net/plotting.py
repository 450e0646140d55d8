"""Figures for benchmark output."""

from __future__ import annotations

import numpy as np


def plot_bench(rows, path, slope: float | None = None, title: str = "tag + region graph construction"):
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    x = np.array([r.triangles for r in rows], dtype=float)
    y = np.array([r.median_seconds for r in rows], dtype=float)
    fig, ax = plt.subplots(figsize=(5, 4))
    ax.loglog(x, y, "o-", label="median of runs")
    if len(x) >= 2:
        ref = y[0] * x / x[0]
        ax.loglog(x, ref, "--", color="gray", label="linear reference")
    ax.set_xlabel("triangles")
    ax.set_ylabel("seconds")
    if slope is not None:
        title = f"{title} (slope {slope:.2f})"
    ax.set_title(title, fontsize=9)
    ax.legend(fontsize=8)
    ax.grid(True, which="both", alpha=0.3)
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)
    return path

"""Static SVG line plots of trajectory columns."""

from __future__ import annotations

from pathlib import Path
from typing import Sequence

import numpy as np


def plot_columns_svg(table: dict[str, np.ndarray], columns: Sequence[str], path, x: str = "t") -> None:
    """One polyline panel per column against ``x``; unknown columns raise KeyError."""
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    missing = [c for c in list(columns) + [x] if c not in table]
    if missing:
        raise KeyError(f"unknown plot columns: {missing}")
    with matplotlib.rc_context({"svg.hashsalt": "suslov", "svg.fonttype": "none"}):
        fig, axes = plt.subplots(len(columns), 1, figsize=(7, 2.2 * len(columns)), sharex=True, squeeze=False)
        for ax, name in zip(axes[:, 0], columns):
            ax.plot(table[x], table[name], lw=1.0)
            ax.set_ylabel(name)
            ax.grid(True, lw=0.3)
        axes[-1, 0].set_xlabel(x)
        fig.tight_layout()
        fig.savefig(Path(path), format="svg", metadata={"Date": None})
        plt.close(fig)

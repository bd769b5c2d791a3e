"""Render simulation results to image files (headless, Agg backend)."""

from __future__ import annotations

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402  (backend must be set first)

from .solver import SimulationResult

__all__ = ["save_result_plot"]


def save_result_plot(result: SimulationResult, path, title: str | None = None) -> str:
    """Plot every probe series against time and save the figure to ``path``.

    The file format follows the extension (png, svg, pdf, ...).  Returns the
    path written.
    """
    fig, ax = plt.subplots(figsize=(8, 4.5))
    try:
        for name, series in result.signals.items():
            ax.plot(result.times, series, label=name)
        ax.set_xlabel("t [s]")
        ax.set_ylabel("signal")
        if title:
            ax.set_title(title)
        if result.signals:
            ax.legend(loc="best")
        ax.grid(True, alpha=0.4)
        fig.tight_layout()
        fig.savefig(path)
    finally:
        plt.close(fig)
    return str(path)

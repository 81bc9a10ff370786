"""Figure rendering for experiment runs.

Renders the per-iteration error traces (one panel per metric, one curve per
solver) to PNG files next to the CSV output, using the non-interactive Agg
backend so runs work headless.
"""

from __future__ import annotations

from pathlib import Path
from typing import Mapping, Sequence

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402  (backend must be set first)

from .solver import IterationRecord  # noqa: E402

_METRICS = (
    ("mse_x", "signal error  ||x* - x_k|| / n"),
    ("mse_y", "gradient error  ||y* - y_k|| / n"),
)


def render_error_figures(
    traces: Mapping[str, Sequence[IterationRecord]], out_dir, dpi: int = 150
) -> list[Path]:
    """Write mse_x.png / mse_y.png for the given solver traces.

    Solvers without error metrics (no ground truth) are skipped; a panel is
    only written when at least one curve has data. Returns the written paths.
    """
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    written: list[Path] = []
    for metric, label in _METRICS:
        fig, ax = plt.subplots(figsize=(6.0, 4.0))
        plotted = False
        for name in sorted(traces):
            ks = [rec.k for rec in traces[name] if getattr(rec, metric) is not None]
            vals = [getattr(rec, metric) for rec in traces[name] if getattr(rec, metric) is not None]
            if not ks:
                continue
            ax.semilogy(ks, vals, label=name.upper(), linewidth=1.2)
            plotted = True
        if plotted:
            ax.set_xlabel("iteration")
            ax.set_ylabel(label)
            ax.grid(True, which="both", alpha=0.3)
            ax.legend()
            fig.tight_layout()
            path = out / f"{metric}.png"
            fig.savefig(path, dpi=dpi)
            written.append(path)
        plt.close(fig)
    return written

"""Matplotlib renderings of comparison traces (gap and suboptimality vs epochs)."""
from __future__ import annotations

from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

FIGSIZE = (6.4, 4.0)


def _by_scheme(outcomes):
    groups: dict[str, list] = {}
    for o in outcomes:
        if o.result is not None:
            groups.setdefault(o.scheme, []).append(o.result)
    return groups


def _plot_metric(outcomes, metric: str, ylabel: str, path: Path, title: str = "") -> bool:
    fig, ax = plt.subplots(figsize=FIGSIZE)
    drawn = False
    for k, (scheme, results) in enumerate(_by_scheme(outcomes).items()):
        color = f"C{k % 10}"
        for j, res in enumerate(results):
            x = np.array([r.epoch for r in res.trace])
            y = np.array([np.nan if getattr(r, metric) is None else getattr(r, metric)
                          for r in res.trace], dtype=float)
            y = np.where(y > 0, y, np.nan)   # log axis cannot show nonpositive values
            if np.all(np.isnan(y)):
                continue
            ax.plot(x, y, color=color, lw=1.2, alpha=0.6,
                    label=scheme if j == 0 else None)
            drawn = True
    if drawn:
        ax.set_yscale("log")
        ax.set_xlabel("epochs")
        ax.set_ylabel(ylabel)
        if title:
            ax.set_title(title)
        ax.grid(True, which="major", alpha=0.3)
        ax.legend(fontsize=8, frameon=False)
        fig.tight_layout()
        fig.savefig(path, dpi=120)
    plt.close(fig)
    return drawn


def render_comparison(outcomes, out_dir, title: str = "") -> list[Path]:
    """Write ``gap.png`` and, if suboptimality was tracked, ``suboptimality.png``."""
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    written = []
    for metric, label in (("gap", "duality gap"), ("suboptimality", "suboptimality")):
        path = out_dir / f"{metric}.png"
        if _plot_metric(outcomes, metric, label, path, title):
            written.append(path)
    return written

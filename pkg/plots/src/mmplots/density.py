"""Terminal-wealth density curves, one per adversary group, colored by Sharpe."""

from __future__ import annotations

from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np
from scipy.stats import gaussian_kde

from .frames import load_dump

FIGSIZE = (10.0, 6.0)
DPI = 100

GROUP_ORDER = ["fixed", "random", "a", "b", "k", "all"]
GROUP_LABELS = {"fixed": "Fix", "random": "Random", "a": "A", "b": "B", "k": "K", "all": "All"}


def _group_key(name: str) -> int:
    return GROUP_ORDER.index(name) if name in GROUP_ORDER else len(GROUP_ORDER)


def render_density(
    dump_path: str | Path,
    out_path: str | Path,
    group_by: str = "adversary",
) -> Path:
    """Kernel-density curve of terminal wealth per group (Scott's-rule bandwidth),
    with a Sharpe-colored marker at each curve's peak and a shared colorbar.

    The dump needs a ``terminal_wealth`` column; grouping uses ``group_by``
    when present, otherwise the whole file is one group.
    """
    df = load_dump(dump_path)
    if group_by in df.columns:
        groups = [(str(name), sub["terminal_wealth"].to_numpy())
                  for name, sub in df.groupby(group_by, sort=False)]
        groups.sort(key=lambda item: _group_key(item[0]))
    else:
        groups = [("all", df["terminal_wealth"].to_numpy())]
    for name, w in groups:
        if len(w) == 0:
            raise ValueError(f"group {name!r} is empty")
        if len(w) < 2 or np.std(w) == 0:
            raise ValueError(f"group {name!r} needs >= 2 distinct wealth values for a density")

    sharpes = {name: float(np.mean(w) / np.std(w, ddof=1)) for name, w in groups}
    smin, smax = min(sharpes.values()), max(sharpes.values())
    if smax - smin < 1e-12:
        smin, smax = smin - 0.5, smax + 0.5
    cmap = plt.get_cmap("viridis")
    norm = matplotlib.colors.Normalize(vmin=smin, vmax=smax)

    fig, ax = plt.subplots(figsize=FIGSIZE, dpi=DPI)
    lo = min(w.min() for _, w in groups)
    hi = max(w.max() for _, w in groups)
    pad = 0.1 * (hi - lo if hi > lo else 1.0)
    grid = np.linspace(lo - pad, hi + pad, 512)
    for name, w in groups:
        kde = gaussian_kde(w)  # Scott's rule by default
        dens = kde(grid)
        label = GROUP_LABELS.get(name, name)
        line, = ax.plot(grid, dens, lw=1.5, label=label)
        peak = int(np.argmax(dens))
        ax.plot(grid[peak], dens[peak], "o", ms=8,
                color=cmap(norm(sharpes[name])), mec="black", mew=0.5, zorder=5)
    ax.set_xlabel("terminal wealth")
    ax.set_ylabel("density")
    ax.legend(title=group_by, loc="upper right", fontsize=8)
    sm = matplotlib.cm.ScalarMappable(norm=norm, cmap=cmap)
    fig.colorbar(sm, ax=ax, label="Sharpe ratio")
    out_path = Path(out_path)
    out_path.parent.mkdir(parents=True, exist_ok=True)
    fig.savefig(out_path, format="png")
    plt.close(fig)
    return out_path

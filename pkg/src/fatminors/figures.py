"""Matplotlib figures for the command line (Agg backend, files only)."""
from __future__ import annotations

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402


def bag_radius_figure(radii: dict, bound, path, title="bag radii") -> None:
    """Bar chart of bag radii per node with the outer-width bound."""
    nodes = sorted(radii)
    fig, ax = plt.subplots(figsize=(7, 3.5))
    ax.bar(range(len(nodes)), [radii[h] for h in nodes], width=1.0, color="#4c72b0")
    if bound is not None:
        ax.axhline(bound, color="#c44e52", linestyle="--", label=f"bound {bound}")
        ax.legend(loc="upper right")
    ax.set_xlabel("node (sorted by id)")
    ax.set_ylabel("bag radius")
    ax.set_title(title)
    fig.tight_layout()
    fig.savefig(path, dpi=110)
    plt.close(fig)


def corpus_figure(rows: list[dict], path) -> None:
    """orw and irs of every decomposition run, each as a fraction of its bound."""
    dec = [r for r in rows if r["branch"] == "decomposition"]
    fig, axes = plt.subplots(1, 2, figsize=(10, 3.8), sharey=True)
    for ax, key in zip(axes, ("orw", "irs")):
        for target, colour in (("k4minus", "#4c72b0"), ("k4", "#dd8452")):
            pts = [(i, r[key] / r[f"{key}_bound"]) for i, r in enumerate(dec) if r["target"] == target]
            if pts:
                xs, ys = zip(*pts)
                ax.scatter(xs, ys, s=12, color=colour, label=target)
        ax.axhline(1.0, color="#c44e52", linestyle="--", linewidth=1)
        ax.set_title(f"{key} / bound")
        ax.set_xlabel("run")
    axes[0].set_ylabel("fraction of bound")
    if dec:
        axes[0].legend(loc="upper left")
    fig.tight_layout()
    fig.savefig(path, dpi=110)
    plt.close(fig)

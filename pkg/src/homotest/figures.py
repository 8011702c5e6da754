"""Figure rendering: null histograms, rejection curves, ordered adjacency.

All output is file-based and deterministic: the Agg backend, a fixed SVG
hash salt, and stripped date metadata make repeated renders of the same
inputs byte-identical.
"""

from __future__ import annotations

import io

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

from .errors import ValidationError
from .graph import CommunityAssignment, Graph

plt.rcParams["svg.hashsalt"] = "homotest"

# first null drawn darker, later ones lighter
_SHADES = ("#31506d", "#8fb4d9", "#c9a227", "#9a6fb0")


def _save(fig, path: str) -> None:
    path = str(path)
    if path.endswith(".svg"):
        fig.savefig(path, metadata={"Date": None})
    elif path.endswith(".png"):
        fig.savefig(path, dpi=150, metadata={"Software": None})
    else:
        fig.savefig(path)
    plt.close(fig)


def fig_null_histograms(samples_by_null: dict, t_obs: float, path: str) -> None:
    """Overlaid histograms of replicate statistics, one shade per null.

    The observed statistic is drawn as a dashed vertical line. Failed
    replicates (None) are excluded from the histograms.
    """
    if not samples_by_null:
        raise ValidationError("need at least one null's samples")
    fig, ax = plt.subplots(figsize=(6.0, 4.0))
    for idx, (label, samples) in enumerate(samples_by_null.items()):
        vals = np.array([s for s in samples if s is not None], dtype=float)
        shade = _SHADES[idx % len(_SHADES)]
        ax.hist(vals, bins=30, color=shade, alpha=0.75, label=f"{label} null")
    ax.axvline(t_obs, color="#b03030", linestyle="--", linewidth=1.5, label="observed")
    ax.set_xlabel("statistic on replicates")
    ax.set_ylabel("count")
    ax.legend(frameon=False)
    fig.tight_layout()
    _save(fig, path)


def fig_rejection_curve(result, path: str) -> None:
    """Rejection rate against the swept parameter, with 2-SE error bars."""
    values = result.values
    if result.param is None or any(v is None for v in values):
        x = np.arange(len(values))
        xlabel = "point"
    else:
        x = np.asarray(values, dtype=float)
        xlabel = result.param
    fig, ax = plt.subplots(figsize=(6.0, 4.0))
    ax.errorbar(
        x,
        result.rates,
        yerr=2.0 * np.asarray(result.ses),
        marker="o",
        color=_SHADES[0],
        capsize=3,
    )
    ax.set_xlabel(xlabel)
    ax.set_ylabel("rejection rate")
    ax.set_ylim(-0.02, 1.02)
    ax.axhline(0.05, color="#999999", linewidth=0.8, linestyle=":")
    fig.tight_layout()
    _save(fig, path)


def community_order(c: CommunityAssignment) -> np.ndarray:
    """Node permutation grouping communities contiguously (stable)."""
    return np.argsort(c.labels, kind="stable")


def fig_adjacency_blocks(g: Graph, c: CommunityAssignment, path: str) -> None:
    """Adjacency matrix rendered with nodes grouped by community."""
    if c.n != g.n:
        raise ValidationError(f"assignment covers {c.n} nodes, graph has {g.n}")
    order = community_order(c)
    a = g.to_dense()[np.ix_(order, order)]
    fig, ax = plt.subplots(figsize=(5.0, 5.0))
    ax.imshow(a, cmap="Greys", interpolation="nearest")
    sizes = c.sizes()
    cuts = np.cumsum(sizes)[:-1] - 0.5
    for cut in cuts:
        ax.axhline(cut, color="#b03030", linewidth=0.6)
        ax.axvline(cut, color="#b03030", linewidth=0.6)
    ax.set_xticks([])
    ax.set_yticks([])
    fig.tight_layout()
    _save(fig, path)


def adjacency_csv(g: Graph, c: CommunityAssignment) -> str:
    """Community-ordered adjacency as CSV (0/1 rows, node ids in header)."""
    if c.n != g.n:
        raise ValidationError(f"assignment covers {c.n} nodes, graph has {g.n}")
    order = community_order(c)
    a = g.to_dense()[np.ix_(order, order)]
    buf = io.StringIO()
    buf.write("# rows and columns ordered by community; original node ids follow\n")
    buf.write("node," + ",".join(str(i) for i in order) + "\n")
    for row_id, row in zip(order, a):
        buf.write(f"{row_id}," + ",".join(str(int(x)) for x in row) + "\n")
    return buf.getvalue()


def samples_csv(samples) -> str:
    """One replicate value per line; failed replicates serialize as nan."""
    lines = ["t_star"]
    for s in samples:
        lines.append("nan" if s is None else f"{float(s):.12g}")
    return "\n".join(lines) + "\n"

"""Headless figure rendering for report files.

Figures are written as self-contained SVG (or whatever the file suffix
selects) through the Agg backend, so no display is needed and plotting can
never block a batch run. Rendering failures must not change exit codes; the
CLI wraps these calls accordingly.
"""

import math

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402  (backend must be pinned first)


def render_jump_curves(
    path,
    ns,
    input_values,
    input_limit: float,
    output_values=None,
    output_limit: float | None = None,
    title: str = "",
):
    """Plot n -> divergence for the input pair and, when given, the image
    pair, with dashed lines at the limit values. Non-finite samples are
    dropped from the curve and counted in the legend."""
    fig, ax = plt.subplots(figsize=(7.0, 4.4))

    def _plot(values, label, color):
        xs = [n for n, v in zip(ns, values) if math.isfinite(v)]
        ys = [v for v in values if math.isfinite(v)]
        skipped = len(values) - len(ys)
        if skipped:
            label = f"{label} ({skipped} non-finite omitted)"
        ax.plot(xs, ys, marker=".", markersize=3.5, linewidth=1.1, label=label, color=color)

    _plot(input_values, "input pair", "tab:blue")
    ax.axhline(input_limit, linestyle="--", linewidth=0.9, color="tab:blue", alpha=0.6)
    if output_values is not None:
        _plot(output_values, "image pair", "tab:red")
        if output_limit is not None:
            ax.axhline(output_limit, linestyle="--", linewidth=0.9, color="tab:red", alpha=0.6)
    ax.set_xscale("log")
    ax.set_xlabel("sequence index n")
    ax.set_ylabel("relative entropy (nats)")
    if title:
        ax.set_title(title, fontsize=10)
    ax.legend(fontsize=8)
    ax.grid(True, which="both", alpha=0.25)
    fig.tight_layout()
    fig.savefig(path)
    plt.close(fig)
    return path

"""Static SVG figures of intensity and g2 traces."""

from __future__ import annotations

from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
from matplotlib.ticker import LogLocator  # noqa: E402

from . import __version__  # noqa: E402
from .io import canonical_json  # noqa: E402

STYLES = ("intensity", "g2")


def build_figure(traces, style: str = "intensity", log: bool | None = None, labels=None):
    """Matplotlib figure for ``traces`` (objects with ``times`` and ``values``).

    ``style="intensity"`` defaults to a log axis with labelled decades;
    ``style="g2"`` is linear with reference lines at 0.5 and 1.
    """
    traces = list(traces)
    if not traces:
        raise ValueError("nothing to plot: empty trace list")
    if style not in STYLES:
        raise ValueError(f"style must be one of {STYLES}, got {style!r}")
    if log is None:
        log = style == "intensity"
    labels = list(labels) if labels is not None else [None] * len(traces)

    fig, ax = plt.subplots(figsize=(6.0, 4.0))
    for trace, label in zip(traces, labels):
        ax.plot(trace.times, trace.values, lw=1.2, label=label)
    if style == "g2":
        for level in (0.5, 1.0):
            ax.axhline(level, color="0.5", lw=0.8, ls="--")
        ax.set_xlabel("delay (ns)")
        ax.set_ylabel("g2(tau)")
    else:
        ax.set_xlabel("time (ns)")
        ax.set_ylabel("normalised intensity")
    if log:
        positive = [t.values[t.values > 0] for t in traces]
        positive = [v for v in positive if v.size]
        if not positive:
            raise ValueError("log scale needs positive values")
        ax.set_yscale("log")
        ax.yaxis.set_major_locator(LogLocator(base=10))
        ax.set_ylim(max(min(float(v.min()) for v in positive), 1e-4), None)
    if any(labels):
        ax.legend(frameon=False)
    fig.tight_layout()
    return fig


def export_plot(traces, path, style: str = "intensity", log: bool | None = None, labels=None, config: dict | None = None) -> Path:
    """Write the figure from :func:`build_figure` as a byte-reproducible SVG."""
    with plt.rc_context({"svg.hashsalt": "superradiance", "svg.fonttype": "none"}):
        fig = build_figure(traces, style, log, labels)
        path = Path(path)
        path.parent.mkdir(parents=True, exist_ok=True)
        meta = {"Date": None, "Creator": f"superradiance {__version__}"}
        if config is not None:
            meta["Description"] = canonical_json(config)
        fig.savefig(path, format="svg", metadata=meta)
        plt.close(fig)
    return path

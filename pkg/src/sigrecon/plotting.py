"""SVG line charts rendered with the non-interactive matplotlib backend."""
from __future__ import annotations

import io as _io
from pathlib import Path
from typing import Sequence

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402

from .io import atomic_write_text, read_csv  # noqa: E402

# fixed ids and no timestamp, so identical data gives identical bytes
_RC = {"svg.hashsalt": "sigrecon", "svg.fonttype": "none"}


def line_chart(path, x, series: dict, xlabel="", ylabel="", title="", logx=False, logy=False,
               style: dict | None = None) -> Path:
    """Write one SVG with a line per entry of ``series`` (label -> y values)."""
    style = style or {}
    with matplotlib.rc_context(_RC):
        fig, ax = plt.subplots(figsize=(6.4, 4.0))
        for label, y in series.items():
            xs = x[label] if isinstance(x, dict) else x
            ax.plot(xs, y, label=label, **style.get(label, {}))
        ax.set_xlabel(xlabel)
        ax.set_ylabel(ylabel)
        if title:
            ax.set_title(title)
        if logx:
            ax.set_xscale("log")
        if logy:
            ax.set_yscale("log")
        if len(series) > 1:
            ax.legend(frameon=False)
        fig.tight_layout()
        buf = _io.StringIO()
        fig.savefig(buf, format="svg", metadata={"Date": None})
        plt.close(fig)
    return atomic_write_text(path, buf.getvalue())


def plot_csv(csv_path, svg_path, x_col: str, y_cols: Sequence[str] | None = None,
             logx=False, logy=False, title="") -> Path:
    """Line chart of numeric CSV columns against ``x_col``."""
    header, rows = read_csv(csv_path)
    if x_col not in header:
        raise KeyError(f"column {x_col!r} not in {header}")
    ix = header.index(x_col)
    y_cols = [c for c in header if c != x_col] if not y_cols else list(y_cols)
    missing = [c for c in y_cols if c not in header]
    if missing:
        raise KeyError(f"columns {missing} not in {header}")
    xs = [float(r[ix]) for r in rows]
    series = {c: [float(r[header.index(c)]) for r in rows] for c in y_cols}
    return line_chart(svg_path, xs, series, xlabel=x_col, title=title, logx=logx, logy=logy)

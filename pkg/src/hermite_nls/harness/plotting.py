"""Static SVG plots of convergence and benchmark tables."""

from __future__ import annotations

import math

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

from .csvio import CsvFormatError, read_table  # noqa: E402
from .experiments import fit_slope  # noqa: E402

__all__ = ["render_plot", "PLOT_KINDS"]

PLOT_KINDS = {
    "order": ("tau", "l2_error"),
    "cpu": ("cpu_seconds", "final_error"),
}

_RC = {
    "svg.hashsalt": "hermite-nls",
    "svg.fonttype": "none",
    "font.family": "DejaVu Sans",
    "figure.figsize": (5.0, 4.0),
}


def _column(header, rows, name):
    j = header.index(name)
    return np.array([float(r[j]) for r in rows])


def render_plot(table, kind: str, out) -> str:
    """Render ``table`` (a CSV path) as a log-log SVG at ``out`` and return the SVG text.

    ``kind="order"`` plots l2_error against tau with the fitted slope;
    ``kind="cpu"`` plots final_error against cpu_seconds, one series per scheme.
    Data markers sit in groups whose id starts with ``data-markers``.
    """
    if kind not in PLOT_KINDS:
        raise ValueError(f"kind must be one of {sorted(PLOT_KINDS)}, got {kind!r}")
    header, rows = read_table(table)
    missing = [c for c in PLOT_KINDS[kind] if c not in header]
    if missing:
        raise CsvFormatError(f"{table}: {kind} plot needs columns {', '.join(missing)}")
    if not rows:
        raise CsvFormatError(f"{table}: no data rows")

    xname, yname = PLOT_KINDS[kind]
    x = _column(header, rows, xname)
    y = _column(header, rows, yname)
    ok = np.isfinite(x) & np.isfinite(y) & (x > 0) & (y > 0)
    if not ok.any():
        raise CsvFormatError(f"{table}: no finite positive points to plot")

    with plt.rc_context(_RC):
        fig, ax = plt.subplots()
        ax.set_xscale("log")
        ax.set_yscale("log")
        if kind == "order":
            ax.plot(x[ok], y[ok], "o", color="C0", gid="data-markers")
            p = fit_slope(x, y)
            if math.isfinite(p):
                xs = np.array([x[ok].min(), x[ok].max()])
                c = np.exp(np.mean(np.log(y[ok]) - p * np.log(x[ok])))
                ax.plot(xs, c * xs**p, "--", color="0.5", gid="fit-line")
            label = f"slope = {p:.3f}" if math.isfinite(p) else "slope = n/a"
            ax.text(0.05, 0.92, label, transform=ax.transAxes, gid="slope-label")
            ax.set_xlabel("time step tau")
            ax.set_ylabel("L2 error")
        else:
            schemes = [r[header.index("scheme")] for r in rows] if "scheme" in header else ["run"] * len(rows)
            schemes = np.array(schemes)
            for i, name in enumerate(sorted(set(schemes[ok]))):
                sel = ok & (schemes == name)
                ax.plot(x[sel], y[sel], "o", color=f"C{i}", label=name, gid=f"data-markers-{name}")
            ax.legend()
            ax.set_xlabel("CPU time [s]")
            ax.set_ylabel("final L2 error")
        ax.grid(True, which="major", alpha=0.3)
        fig.tight_layout()
        fig.savefig(out, format="svg", metadata={"Date": None})
        plt.close(fig)
    with open(out, encoding="utf-8") as fh:
        return fh.read()

"""Log-log SVG renderings of the CSV outputs. The CSVs stay the source of truth."""

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

# reproducible SVG ids and no timestamp
matplotlib.rcParams["svg.hashsalt"] = "destwalk"
_META = {"Date": None}


def _reference_line(ax, x, y, slope):
    x0, x1 = np.min(x), np.max(x)
    if x1 <= x0:
        return
    # anchor the guide on the data point nearest the geometric centre
    k = np.argmin(np.abs(np.log(x) - 0.5 * np.log(x0 * x1)))
    xm, ym = x[k], y[k]
    xs = np.array([x0, x1])
    ax.plot(xs, ym * (xs / xm) ** slope, "k--", lw=1, label=f"slope {slope:g}")


def loglog_plot(path, series, xlabel, ylabel, ref_slope=None, title=None):
    """``series`` is a list of ``(label, x, y)``; zero/negative points are dropped."""
    fig, ax = plt.subplots(figsize=(5, 4))
    for label, x, y in series:
        x = np.asarray(x, dtype=float)
        y = np.asarray(y, dtype=float)
        keep = (x > 0) & (y > 0)
        ax.plot(x[keep], y[keep], ".", ms=2, label=label)
    if ref_slope is not None and series:
        _, x, y = series[0]
        x = np.asarray(x, dtype=float)
        y = np.asarray(y, dtype=float)
        keep = (x > 0) & (y > 0)
        if keep.sum() > 1:
            _reference_line(ax, x[keep], y[keep], ref_slope)
    ax.set_xscale("log")
    ax.set_yscale("log")
    ax.set_xlabel(xlabel)
    ax.set_ylabel(ylabel)
    if title:
        ax.set_title(title)
    ax.legend(fontsize=7)
    fig.tight_layout()
    fig.savefig(path, format="svg", metadata=_META)
    plt.close(fig)

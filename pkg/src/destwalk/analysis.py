"""Empirical statistics of simulated walks.

Rank plots (unnormalised CCDFs), power-law tail fits, log-correlations,
radial occupancy and 2-D occupancy grids. Natural logs throughout.
"""

from dataclasses import dataclass

import numpy as np

from .errors import DegenerateSeriesError, InsufficientDataError, InvalidDimensionError

MIN_FIT_POINTS = 50


@dataclass
class RankPlot:
    lengths: np.ndarray  # descending
    ranks: np.ndarray

    def __iter__(self):
        return iter(zip(self.lengths.tolist(), self.ranks.tolist()))

    def __len__(self):
        return len(self.lengths)


@dataclass
class TailFit:
    """Power-law tail summary.

    ``slope`` is the least-squares slope of log rank against log length for
    lengths in ``[l_lo, l_hi)``; a CCDF slope of ``-1`` corresponds to a
    density exponent ``mu = 2``. ``mu_mle`` is the continuous power-law MLE
    ``1 + n / sum(log(l / l_lo))`` over all lengths ``>= l_lo``.
    """

    slope: float
    intercept: float
    r_squared: float
    mu_mle: float
    mu_stderr: float
    window: tuple
    n_points: int
    n_tail: int


@dataclass
class RadialHistogram:
    """``probabilities[k]`` is the share of positions with ``r0[k] - delta <= ||X|| < r0[k]``."""

    r0: np.ndarray
    delta_r0: float
    counts: np.ndarray
    total: int

    @property
    def r_range(self):
        return (float(self.r0[0]), float(self.r0[-1] + self.delta_r0))

    @property
    def probabilities(self):
        if self.total == 0:
            return np.zeros(len(self.counts))
        return self.counts / self.total


@dataclass
class OccupancyGrid:
    cell: float
    extent: tuple
    counts: np.ndarray  # counts[i, j]: x1 in cell i, x2 in cell j
    overflow: int = 0

    @property
    def total(self):
        return int(self.counts.sum())

    def centers(self):
        lo = self.extent[0]
        return lo + (np.arange(self.counts.shape[0]) + 0.5) * self.cell


def _positive_lengths(lengths):
    a = np.asarray(lengths, dtype=float).ravel()
    if a.size == 0:
        raise ValueError("no lengths given")
    if np.any(~(a > 0)):
        raise ValueError("lengths must be positive")
    return a


def rank_plot(lengths):
    """Lengths in descending order with rank = number of lengths ``>=`` each."""
    a = _positive_lengths(lengths)
    asc = np.sort(a)
    ranks = a.size - np.searchsorted(asc, asc, side="left")
    return RankPlot(asc[::-1].copy(), ranks[::-1].copy())


def loglog_slope(x, y):
    """Least-squares ``(slope, intercept, r_squared)`` of ``log y`` on ``log x``."""
    lx = np.log(np.asarray(x, dtype=float))
    ly = np.log(np.asarray(y, dtype=float))
    slope, intercept = np.polyfit(lx, ly, 1)
    resid = ly - (slope * lx + intercept)
    ss_tot = np.sum((ly - ly.mean()) ** 2)
    r2 = 1.0 - np.sum(resid**2) / ss_tot if ss_tot > 0 else 1.0
    return float(slope), float(intercept), float(r2)


def fit_tail(lengths, window=(0.01, 10.0)):
    """Fit a power-law tail over ``window = (l_lo, l_hi)``.

    The upper edge is exclusive so that an atom of clipped steps sitting
    exactly at ``l_hi = l_max`` does not enter the regression.

    Raises
    ------
    InsufficientDataError
        Fewer than 50 lengths fall inside the window.
    """
    l_lo, l_hi = float(window[0]), float(window[1])
    if not (0 < l_lo < l_hi):
        raise ValueError("window must satisfy 0 < l_lo < l_hi")
    rp = rank_plot(lengths)
    inside = (rp.lengths >= l_lo) & (rp.lengths < l_hi)
    n_points = int(inside.sum())
    if n_points < MIN_FIT_POINTS:
        raise InsufficientDataError(
            f"{n_points} lengths in [{l_lo:g}, {l_hi:g}); need at least {MIN_FIT_POINTS}"
        )
    slope, intercept, r2 = loglog_slope(rp.lengths[inside], rp.ranks[inside])
    tail = rp.lengths[rp.lengths >= l_lo]
    s = np.sum(np.log(tail / l_lo))
    mu = 1.0 + tail.size / s
    return TailFit(
        slope=slope,
        intercept=intercept,
        r_squared=r2,
        mu_mle=float(mu),
        mu_stderr=float((mu - 1.0) / np.sqrt(tail.size)),
        window=(l_lo, l_hi),
        n_points=n_points,
        n_tail=int(tail.size),
    )


def quantile_window(lengths, q=0.99, l_max=None):
    """Tail window ``[quantile_q, l_max)`` for comparing fits across regimes."""
    a = np.asarray(lengths, dtype=float)
    hi = float(l_max) if l_max is not None else float(np.max(a)) * (1 + 1e-12)
    return float(np.quantile(a, q)), hi


def pearson(x, y):
    """Product-moment correlation coefficient."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if x.shape != y.shape or x.ndim != 1:
        raise ValueError("x and y must be 1-D sequences of equal length")
    if x.size < 3:
        raise ValueError("need at least 3 points")
    dx = x - x.mean()
    dy = y - y.mean()
    sxx = np.dot(dx, dx)
    syy = np.dot(dy, dy)
    if sxx == 0 or syy == 0:
        raise DegenerateSeriesError("series has zero variance")
    c = np.dot(dx, dy) / np.sqrt(sxx * syy)
    return float(np.clip(c, -1.0, 1.0))


def lag_log_correlation(series, lag=1):
    """``pearson(log s[:-lag], log s[lag:])``."""
    s = np.asarray(series, dtype=float)
    if np.any(~(s > 0)):
        raise ValueError("series values must be positive")
    if s.size <= lag + 2:
        raise ValueError("series too short for the requested lag")
    ls = np.log(s)
    return pearson(ls[:-lag], ls[lag:])


def _radial_bins(delta_r0, r_range):
    r_min, r_max = float(r_range[0]), float(r_range[1])
    if not delta_r0 > 0:
        raise ValueError("delta_r0 must be positive")
    if r_min < delta_r0 or not r_max > r_min:
        raise ValueError("need delta_r0 <= r_min < r_max")
    n_bins = int(np.ceil((r_max - r_min) / delta_r0 - 1e-9))
    return r_min, n_bins


def radial_occupancy_from_r0(r0, delta_r0=0.01, r_range=(0.01, 10.0)):
    """Radial histogram from distances to the origin."""
    d = np.asarray(r0, dtype=float).ravel()
    r_min, n_bins = _radial_bins(delta_r0, r_range)
    lower = r_min - delta_r0
    idx = np.floor((d - lower) / delta_r0)
    ok = (idx >= 0) & (idx < n_bins)
    counts = np.bincount(idx[ok].astype(np.int64), minlength=n_bins)
    labels = r_min + np.arange(n_bins) * delta_r0
    return RadialHistogram(labels, float(delta_r0), counts, int(d.size))


def radial_occupancy(positions, delta_r0=0.01, r_range=(0.01, 10.0)):
    """Share of positions in each shell ``[r0 - delta_r0, r0)`` around the origin."""
    p = np.asarray(positions, dtype=float)
    if p.ndim == 1:
        p = p[None, :]
    return radial_occupancy_from_r0(np.linalg.norm(p, axis=-1), delta_r0, r_range)


def merge_radial(hists):
    first = hists[0]
    counts = sum(h.counts for h in hists)
    return RadialHistogram(first.r0, first.delta_r0, counts, sum(h.total for h in hists))


def occupancy_grid(positions, cell=0.02, extent=(-10.0, 10.0)):
    """Count 2-D positions per square cell; out-of-extent points go to ``overflow``."""
    p = np.asarray(positions, dtype=float)
    if p.ndim != 2 or p.shape[1] != 2:
        raise InvalidDimensionError("occupancy grid needs 2-D positions")
    if not cell > 0:
        raise ValueError("cell must be positive")
    lo, hi = float(extent[0]), float(extent[1])
    m = int(round((hi - lo) / cell))
    idx = np.floor((p - lo) / cell)
    ok = np.all((p >= lo) & (p < hi) & (idx >= 0) & (idx < m), axis=1)
    ij = idx[ok].astype(np.int64)
    counts = np.bincount(ij[:, 0] * m + ij[:, 1], minlength=m * m).reshape(m, m)
    return OccupancyGrid(float(cell), (lo, hi), counts, int((~ok).sum()))


def merge_grids(grids):
    first = grids[0]
    counts = sum(g.counts for g in grids)
    return OccupancyGrid(first.cell, first.extent, counts, sum(g.overflow for g in grids))

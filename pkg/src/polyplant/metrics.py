"""Validation statistics over paired measured/simulated series.

Three scores quantify how closely a simulated channel tracks a measured
one once both sit on a common 60 s grid: the normalised root mean squared
relative error (errors scaled by the measured range), the squared Pearson
correlation, and a goodness-of-fit percentage that compares the residual
norm against the measured series' own spread (100 = identical, 0 = no
better than predicting the mean, negative = worse).
"""

from dataclasses import dataclass

import math

import numpy as np

from .errors import AlignmentError, DegenerateSeriesError, InvalidInputError

#: Grid spacing of simulation logs and aligned series (s).
GRID_S = 60.0


@dataclass(frozen=True)
class PairedSeries:
    """Measured and simulated values on one common time grid."""

    y: np.ndarray       # measured
    y_star: np.ndarray  # simulated

    def __post_init__(self):
        y = np.asarray(self.y, dtype=float)
        ys = np.asarray(self.y_star, dtype=float)
        if y.ndim != 1 or y.shape != ys.shape:
            raise InvalidInputError("paired series must be 1-d and equal length")
        if y.size < 2:
            raise InvalidInputError("paired series need at least 2 points")
        if not (np.isfinite(y).all() and np.isfinite(ys).all()):
            raise InvalidInputError("paired series must be finite")
        object.__setattr__(self, "y", y)
        object.__setattr__(self, "y_star", ys)


def align(t_measured, y_measured, t_sim, y_sim) -> PairedSeries:
    """Pair a measured series with a simulated one on the 60 s grid.

    The simulated series is expected on the grid already (as written by the
    simulation log); measured samples are linearly interpolated onto the
    grid points falling inside the overlap of both spans.
    """
    tm = np.asarray(t_measured, dtype=float)
    ym = np.asarray(y_measured, dtype=float)
    ts = np.asarray(t_sim, dtype=float)
    ys = np.asarray(y_sim, dtype=float)
    if tm.size != ym.size or ts.size != ys.size:
        raise InvalidInputError("time and value arrays must match in length")
    if tm.size < 2 or ts.size < 2:
        raise InvalidInputError("need at least 2 samples per series")
    if np.any(np.diff(tm) <= 0.0) or np.any(np.diff(ts) <= 0.0):
        raise InvalidInputError("time axes must be strictly increasing")

    lo = max(tm[0], ts[0])
    hi = min(tm[-1], ts[-1])
    start = math.ceil(lo / GRID_S) * GRID_S
    grid = np.arange(start, hi + 1e-9, GRID_S)
    if grid.size < 2:
        raise AlignmentError(
            f"series overlap [{lo:g}, {hi:g}] s holds fewer than two grid points"
        )
    return PairedSeries(y=np.interp(grid, tm, ym), y_star=np.interp(grid, ts, ys))


def rolling_mean(values, window_points: int = 3) -> np.ndarray:
    """Centered rolling mean over the grid, shrinking at the edges.

    With the 60 s grid the default window of 3 points spans 3 minutes,
    which smooths out the sampling jitter of fast-cycling channels.
    """
    v = np.asarray(values, dtype=float)
    if window_points < 1 or window_points % 2 == 0:
        raise InvalidInputError("window_points must be odd and >= 1")
    half = window_points // 2
    out = np.empty_like(v)
    for i in range(v.size):
        a = max(0, i - half)
        b = min(v.size, i + half + 1)
        out[i] = v[a:b].mean()
    return out


def nrmsre(p: PairedSeries) -> float:
    """Root mean square of errors normalised by the measured range."""
    span = float(p.y.max() - p.y.min())
    if span == 0.0:
        raise DegenerateSeriesError("measured series is constant, range is zero")
    e = (p.y - p.y_star) / span
    return float(np.sqrt(np.mean(e * e)))


def r_squared(p: PairedSeries) -> float:
    """Squared Pearson correlation between measured and simulated."""
    dy = p.y - p.y.mean()
    ds = p.y_star - p.y_star.mean()
    vy = float(np.dot(dy, dy))
    vs = float(np.dot(ds, ds))
    if vy == 0.0 or vs == 0.0:
        raise DegenerateSeriesError("a constant series has no correlation")
    r = float(np.dot(dy, ds)) / math.sqrt(vy * vs)
    # clip the tiny float excursions past 1 that exact collinearity produces
    return min(r * r, 1.0)


def gof(p: PairedSeries) -> float:
    """Goodness of fit in percent; 100 is exact, negative is possible."""
    dy = p.y - p.y.mean()
    vy = float(np.dot(dy, dy))
    if vy == 0.0:
        raise DegenerateSeriesError("measured series is constant")
    resid = p.y_star - p.y
    return 100.0 * (1.0 - math.sqrt(float(np.dot(resid, resid)) / vy))

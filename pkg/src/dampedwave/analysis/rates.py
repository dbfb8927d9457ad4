"""Power-law decay fits, blow-up detection and the weighted X(T) norm."""

from __future__ import annotations

import math

import numpy as np
from scipy import stats

from ..evolution import Trajectory

__all__ = ["fit_decay_rate", "detect_blowup", "xt_norm", "XTNorm", "MIN_FIT_POINTS"]

MIN_FIT_POINTS = 8


def _as_columns(series) -> tuple[np.ndarray, np.ndarray]:
    if isinstance(series, tuple) and len(series) == 2 and np.ndim(series[0]) == 1:
        t, v = series
    else:
        arr = np.asarray(series, dtype=float)
        if arr.ndim != 2 or arr.shape[1] != 2:
            raise ValueError("series must be (t, value) pairs or a (times, values) tuple")
        t, v = arr[:, 0], arr[:, 1]
    return np.asarray(t, dtype=float), np.asarray(v, dtype=float)


def fit_decay_rate(series, window) -> tuple[float, float]:
    """Least-squares slope of log(value) against log(1 + t) inside ``window``.

    Returns ``(slope, stderr)``.  A series ``C (1+t)^a`` gives slope ``a``.
    """
    t, v = _as_columns(series)
    lo, hi = window
    keep = (t >= lo) & (t <= hi)
    if keep.sum() < MIN_FIT_POINTS:
        raise ValueError(f"{keep.sum()} points in window {window}; need {MIN_FIT_POINTS}")
    if np.any(v[keep] <= 0):
        raise ValueError("values must be positive for a log-log fit")
    x, y = np.log1p(t[keep]), np.log(v[keep])
    if np.ptp(y) == 0:
        return 0.0, 0.0
    res = stats.linregress(x, y)
    return float(res.slope), float(res.stderr)


def detect_blowup(traj: Trajectory, threshold: float) -> float | None:
    """First time ||u||_inf crosses ``threshold``.

    The crossing is located by log-linear interpolation between records.  A
    trajectory that was cut short by the solver without crossing the given
    threshold reports its own detection time; a completed one returns None.
    """
    if threshold <= 0:
        raise ValueError("threshold must be positive")
    t, v = traj.t, traj.series("linf")
    above = np.nonzero(~(v <= threshold))[0]
    if above.size:
        k = int(above[0])
        if k == 0 or not np.isfinite(v[k]) or v[k - 1] <= 0:
            return float(t[k])
        lo, hi = math.log(v[k - 1]), math.log(v[k])
        frac = (math.log(threshold) - lo) / (hi - lo)
        return float(t[k - 1] + frac * (t[k] - t[k - 1]))
    if traj.blown_up:
        return traj.blowup_time
    return None


class XTNorm(float):
    """A float that remembers the blow-up time when it is the infinite sentinel."""

    detect_time: float | None = None

    def __new__(cls, value, detect_time=None):
        obj = super().__new__(cls, value)
        obj.detect_time = detect_time
        return obj


def xt_norm(traj: Trajectory, beta: float, alpha: float | None = None) -> XTNorm:
    """sup_t of (1+t)^{b/2}||u||_2 + (1+t)^{(b+a)/2}||u||_{H^a} + (1+t)^{b/2+1}/log(e+t) ||u_t||_2.

    ``alpha`` defaults to the trajectory's own Sobolev order and must match
    it, since only that seminorm was recorded.
    """
    if alpha is None:
        alpha = traj.alpha
    if not math.isclose(alpha, traj.alpha):
        raise ValueError(f"trajectory recorded H^{traj.alpha}, not H^{alpha}")
    if traj.blown_up:
        return XTNorm(math.inf, traj.blowup_time)
    if len(traj) == 0:
        return XTNorm(0.0)
    t = traj.t
    total = (
        (1 + t) ** (beta / 2) * traj.series("l2")
        + (1 + t) ** ((beta + alpha) / 2) * traj.series("hdot_alpha")
        + (1 + t) ** (beta / 2 + 1) / np.log(np.e + t) * traj.series("dt_l2")
    )
    if not np.all(np.isfinite(total)):
        raise ValueError("trajectory norms must be finite")
    return XTNorm(float(np.max(total)))

"""C-infinity transition and plateau profiles.

Everything is built from one smooth step on [0, 1],

    h(s) = e^{-1/s} / (e^{-1/s} + e^{-1/(1-s)}) = sigmoid(1/(1-s) - 1/s),

which is 0 for s <= 0, 1 for s >= 1 and flat to all orders at both ends.
The logistic form is evaluated in log space so that values and derivatives
stay accurate where they are tiny, which matters for ratios such as
chi^{-a} |chi'|^b near the edge of a support.
"""

from __future__ import annotations

import numpy as np
from scipy.special import expit, log_expit

__all__ = [
    "smooth_step",
    "smooth_step_log_derivatives",
    "plateau",
    "plateau_derivatives",
]


def _interior(s):
    s = np.asarray(s, dtype=float)
    inside = (s > 0) & (s < 1)
    si = np.where(inside, s, 0.5)
    return s, inside, si


def smooth_step(s):
    """h(s): 0 below 0, 1 above 1, C-infinity in between."""
    s, inside, si = _interior(s)
    with np.errstate(over="ignore"):
        g = 1.0 / (1.0 - si) - 1.0 / si
    return np.where(inside, expit(g), np.where(s >= 1, 1.0, 0.0))


def _log_sigmoid_prime(g):
    # log of sigmoid'(g) = log sigmoid(g) + log sigmoid(-g)
    return log_expit(g) + log_expit(-g)


def smooth_step_log_derivatives(s):
    """Logs of (1 - h), |h'| and |h''| together with the sign of h''.

    Outside (0, 1) the derivatives vanish and their logs are ``-inf``.
    """
    s, inside, si = _interior(s)
    with np.errstate(over="ignore", invalid="ignore"):
        g = 1.0 / (1.0 - si) - 1.0 / si
        dg = 1.0 / (1.0 - si) ** 2 + 1.0 / si**2
        d2g = 2.0 / (1.0 - si) ** 3 - 2.0 / si**3
        log_sp = _log_sigmoid_prime(g)
        # h'' = sigma'(g) * ((1 - 2 sigma(g)) g'^2 + g'')
        inner = (1.0 - 2.0 * expit(g)) * dg**2 + d2g
    with np.errstate(divide="ignore"):
        log_one_minus = np.where(inside, log_expit(-g), np.where(s >= 1, -np.inf, 0.0))
        log_d1 = np.where(inside, log_sp + np.log(dg), -np.inf)
        log_d2 = np.where(inside, log_sp + np.log(np.abs(inner)), -np.inf)
    sign_d2 = np.where(inside, np.sign(inner), 0.0)
    return log_one_minus, log_d1, log_d2, sign_d2


def plateau(r, inner: float, outer: float, *, log_scale: bool = False):
    """1 for r <= inner, 0 for r >= outer, smooth and decreasing between.

    With ``log_scale`` the transition variable is log(r/inner) / log(outer/inner),
    which makes dyadic rescalings of the profile telescope cleanly.
    """
    r = np.asarray(r, dtype=float)
    if log_scale:
        with np.errstate(divide="ignore"):
            s = np.log(np.maximum(r, 0.0) / inner) / np.log(outer / inner)
    else:
        s = (r - inner) / (outer - inner)
    return 1.0 - smooth_step(s)


def plateau_derivatives(r, inner: float, outer: float):
    """Linear-scale plateau and its first two radial derivatives, in log form.

    Returns ``(log_value, log_abs_d1, log_abs_d2, sign_d2)``; the first
    derivative is nonpositive everywhere.
    """
    r = np.asarray(r, dtype=float)
    width = outer - inner
    s = (r - inner) / width
    log_val, log_d1, log_d2, sign = smooth_step_log_derivatives(s)
    return log_val, log_d1 - np.log(width), log_d2 - 2 * np.log(width), -sign

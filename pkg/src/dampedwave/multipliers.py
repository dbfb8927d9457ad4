"""Fourier multipliers of the damped wave propagator and the fractional heat flow.

Each mode of ``u_tt - Laplace u + u_t = 0`` obeys ``y'' + y' + |xi|^2 y = 0``
with characteristic roots ``tau = (-1 +- sqrt(1 - 4|xi|^2)) / 2``.  The two
fundamental solutions used by the representation formula are

    K0(0) = 1, K0'(0) = -1/2        K1(0) = 0, K1'(0) = 1

and the solution reads ``u_hat = (K0 + K1/2) u0_hat + K1 u1_hat``.

With the signed discriminant ``D = 1 - 4|xi|^2`` both regimes share one form,

    K0 = exp(-t/2) C(D t^2 / 4),     K1 = t exp(-t/2) S(D t^2 / 4),

where C(z) = cosh(sqrt z), S(z) = sinh(sqrt z)/sqrt z, continued to z < 0 by
cos/sin.  Near |xi| = 1/2 (|D| < 1e-8) the entire series of C and S are
summed instead of the closed forms.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass
from pathlib import Path

import numpy as np

__all__ = [
    "KernelBranch",
    "BoundScanReport",
    "classify",
    "k0_hat",
    "k1_hat",
    "kernel_time_derivatives",
    "k1_time_integral",
    "heat_symbol",
    "verify_multiplier_bounds",
    "scan_zone",
    "ZONE_BOUNDS",
    "write_bound_reports",
]

BOUNDARY_TOL = 1e-8
DEFAULT_EPSILON = 0.25
_SERIES_TERMS = 24


@dataclass(frozen=True)
class KernelBranch:
    regime: str
    discriminant: float
    xi_norm: float


def classify(xi_norm: float) -> KernelBranch:
    """Regime of a frequency relative to the critical radius 1/2."""
    if xi_norm < 0:
        raise ValueError("xi_norm must be nonnegative")
    if xi_norm < 0.5:
        return KernelBranch("low", 1.0 - 4.0 * xi_norm**2, xi_norm)
    if xi_norm == 0.5:
        return KernelBranch("boundary", 0.0, xi_norm)
    return KernelBranch("high", 4.0 * xi_norm**2 - 1.0, xi_norm)


def _check_t(t):
    t = np.asarray(t, dtype=float)
    if np.any(t < 0):
        raise ValueError("t must be nonnegative")
    return t


def _series(z, odd: bool):
    # sum z^k / (2k)!  (odd=False)  or  sum z^k / (2k+1)!  (odd=True)
    term = np.ones_like(z)
    total = np.ones_like(z)
    for k in range(1, _SERIES_TERMS):
        denom = (2 * k) * (2 * k + 1) if odd else (2 * k - 1) * (2 * k)
        term = term * z / denom
        total = total + term
    return total


def _damped_parts(t, xi_norm):
    """Return (e^{-t/2} C, t e^{-t/2} S, D) broadcast over (t, xi)."""
    t = _check_t(t)
    xi = np.asarray(xi_norm, dtype=float)
    if np.any(xi < 0):
        raise ValueError("xi_norm must be nonnegative")
    t, xi = np.broadcast_arrays(t, xi)
    D = 1.0 - 4.0 * xi**2
    c = np.empty(t.shape)
    s = np.empty(t.shape)

    near = np.abs(D) < BOUNDARY_TOL
    low = (D > 0) & ~near
    high = (D < 0) & ~near

    if np.any(low):
        r = np.sqrt(D[low])
        y = 0.5 * r * t[low]
        # e^{-t/2} cosh y and e^{-t/2} sinh y without overflow
        lead = np.exp(y - 0.5 * t[low])
        c[low] = 0.5 * lead * (1.0 + np.exp(-2.0 * y))
        s[low] = -lead * np.expm1(-2.0 * y) / r
    if np.any(high):
        r = np.sqrt(-D[high])
        y = 0.5 * r * t[high]
        damp = np.exp(-0.5 * t[high])
        c[high] = damp * np.cos(y)
        s[high] = 2.0 * damp * np.sin(y) / r
    if np.any(near):
        tn = t[near]
        z = D[near] * tn**2 / 4.0
        damp = np.exp(-0.5 * tn)
        c[near] = damp * _series(z, odd=False)
        s[near] = tn * damp * _series(z, odd=True)
    return c, s, D


def _maybe_scalar(a):
    return float(a) if np.ndim(a) == 0 else a


def k0_hat(t, xi_norm):
    """Fundamental solution with K0(0) = 1, K0'(0) = -1/2."""
    c, _, _ = _damped_parts(t, xi_norm)
    return _maybe_scalar(c)


def k1_hat(t, xi_norm):
    """Fundamental solution with K1(0) = 0, K1'(0) = 1."""
    _, s, _ = _damped_parts(t, xi_norm)
    return _maybe_scalar(s)


def kernel_time_derivatives(t, xi_norm):
    """(dK0/dt, dK1/dt).

    Uses ``K1' = K0 - K1/2`` and ``K0' = -K0/2 + (D/4) K1``, both of which
    follow from differentiating the common form above.
    """
    c, s, D = _damped_parts(t, xi_norm)
    dk0 = -0.5 * c + 0.25 * D * s
    dk1 = c - 0.5 * s
    return _maybe_scalar(dk0), _maybe_scalar(dk1)


def k1_time_integral(h, xi_norm):
    """Integral of K1(s) over s in [0, h].

    Integrating the mode equation gives
    ``K1'(h) + K1(h) - 1 + |xi|^2 int K1 = 0``; for small |xi| that quotient
    cancels badly, so the root form with ``expm1`` is used instead.
    """
    h = _check_t(h)
    xi = np.asarray(xi_norm, dtype=float)
    h, xi = np.broadcast_arrays(h, xi)
    out = np.empty(h.shape)

    small = xi < 0.25
    if np.any(small):
        hs, xs = h[small], xi[small]
        r = np.sqrt(1.0 - 4.0 * xs**2)
        tau_p = 0.5 * (-1.0 + r)
        tau_m = 0.5 * (-1.0 - r)
        # (e^{tau h} - 1)/tau, with tau_p -> 0 as xi -> 0
        with np.errstate(invalid="ignore", divide="ignore"):
            a = np.where(tau_p != 0, np.expm1(tau_p * hs) / np.where(tau_p != 0, tau_p, 1.0), hs)
        b = np.expm1(tau_m * hs) / tau_m
        out[small] = (a - b) / r
    big = ~small
    if np.any(big):
        hb, xb = h[big], xi[big]
        c, s, D = _damped_parts(hb, xb)
        dk1 = c - 0.5 * s
        out[big] = (1.0 - dk1 - s) / xb**2
    return _maybe_scalar(out)


def heat_symbol(t, xi_norm, alpha: float = 1.0):
    """exp(-t |xi|^{2 alpha}), the symbol of the semigroup of (-Laplace)^alpha."""
    if alpha < 1:
        raise ValueError(f"alpha must be >= 1, got {alpha}")
    t = _check_t(t)
    xi = np.asarray(xi_norm, dtype=float)
    return _maybe_scalar(np.exp(-t * xi ** (2.0 * alpha)))


# -- pointwise bound scans ---------------------------------------------------


@dataclass(frozen=True)
class BoundScanReport:
    zone: str
    bound_id: str
    scanned_points: int
    worst_ratio: float
    argmax_t: float
    argmax_xi: float
    claimed_form: str

    def as_row(self) -> list:
        return [
            self.zone,
            self.bound_id,
            self.scanned_points,
            repr(self.worst_ratio),
            repr(self.argmax_t),
            repr(self.argmax_xi),
        ]


def _slowest_mid_rate(eps):
    return 0.5 * (1.0 - np.sqrt(1.0 - 4.0 * eps**2))


def _sum_kernel(t, x):
    return k0_hat(t, x) + 0.5 * k1_hat(t, x)


def _dt_sum_kernel(t, x):
    d0, d1 = kernel_time_derivatives(t, x)
    return d0 + 0.5 * d1


def _dt_k1(t, x):
    return kernel_time_derivatives(t, x)[1]


# Each entry: bound_id -> (lhs(t, xi, opts), rhs(t, xi, opts), description).
# ``c`` is the exponent constant; the zone default is used when not given.
ZONE_BOUNDS = {
    "low": {
        "K1": (
            lambda t, x, o: np.abs(k1_hat(t, x)),
            lambda t, x, o: np.exp(-o["c"] * x**2 * t),
            "|K1| <= C exp(-c|xi|^2 t)",
        ),
        "K0_plus_half_K1": (
            lambda t, x, o: np.abs(_sum_kernel(t, x)),
            lambda t, x, o: np.exp(-o["c"] * x**2 * t),
            "|K0 + K1/2| <= C exp(-c|xi|^2 t)",
        ),
        "dt_K0_plus_half_K1": (
            lambda t, x, o: np.abs(_dt_sum_kernel(t, x)),
            lambda t, x, o: x**2 * np.exp(-o["c"] * x**2 * t),
            "|d/dt (K0 + K1/2)| <= C |xi|^2 exp(-c|xi|^2 t)",
        ),
        "dt_K1": (
            lambda t, x, o: np.abs(_dt_k1(t, x)),
            lambda t, x, o: x**2 * np.exp(-o["c"] * x**2 * t) + np.exp(-0.5 * t),
            "|d/dt K1| <= C (|xi|^2 exp(-c|xi|^2 t) + exp(-t/2))",
        ),
        "decay_shape": (
            lambda t, x, o: x ** o["sigma"] * np.exp(-o["c"] * t * x ** o["delta"]),
            lambda t, x, o: (1.0 + t) ** (-o["sigma"] / o["delta"]),
            "|xi|^sigma exp(-c t |xi|^delta) <= C (1+t)^(-sigma/delta)",
        ),
    },
    "mid": {
        "K0_plus_half_K1": (
            lambda t, x, o: np.abs(_sum_kernel(t, x)),
            lambda t, x, o: np.exp(-o["c"] * t),
            "|K0 + K1/2| <= C exp(-c t)",
        ),
        "K1_weighted": (
            lambda t, x, o: x ** o["alpha"] * np.abs(k1_hat(t, x)),
            lambda t, x, o: np.exp(-o["c"] * t),
            "|xi|^alpha |K1| <= C exp(-c t)",
        ),
        "dt_K0_plus_half_K1": (
            lambda t, x, o: np.abs(_dt_sum_kernel(t, x)),
            lambda t, x, o: np.exp(-o["c"] * t),
            "|d/dt (K0 + K1/2)| <= C exp(-c t)",
        ),
        "dt_K1": (
            lambda t, x, o: np.abs(_dt_k1(t, x)),
            lambda t, x, o: np.exp(-o["c"] * t),
            "|d/dt K1| <= C exp(-c t)",
        ),
    },
    "high": {
        "K0": (
            lambda t, x, o: np.abs(k0_hat(t, x)),
            lambda t, x, o: np.exp(-0.5 * t),
            "|K0| <= exp(-t/2)",
        ),
        "K0_plus_half_K1": (
            lambda t, x, o: np.abs(_sum_kernel(t, x)),
            lambda t, x, o: np.exp(-o["c"] * t),
            "|K0 + K1/2| <= C exp(-c t)",
        ),
        "K1_weighted": (
            lambda t, x, o: x ** o["alpha"] * np.abs(k1_hat(t, x)),
            lambda t, x, o: np.exp(-o["c"] * t),
            "|xi|^alpha |K1| <= C exp(-c t)",
        ),
        "dt_K0_plus_half_K1": (
            lambda t, x, o: np.abs(_dt_sum_kernel(t, x)),
            lambda t, x, o: x * np.exp(-o["c"] * t),
            "|d/dt (K0 + K1/2)| <= C |xi| exp(-c t)",
        ),
        "dt_K1": (
            lambda t, x, o: np.abs(_dt_k1(t, x)),
            lambda t, x, o: np.exp(-o["c"] * t),
            "|d/dt K1| <= C exp(-c t)",
        ),
    },
}


def _zone_range(zone: str, eps: float):
    if zone == "low":
        return lambda x: (x >= 0) & (x < eps)
    if zone == "mid":
        return lambda x: (x >= eps) & (x <= 0.5)
    if zone == "high":
        return lambda x: x > 0.5
    raise ValueError(f"unknown zone {zone!r}; expected low, mid or high")


def _default_c(zone: str, eps: float) -> float:
    if zone == "low":
        return 1.0
    if zone == "mid":
        return float(_slowest_mid_rate(eps))
    return 0.25


def verify_multiplier_bounds(
    zone: str,
    t_grid,
    xi_grid,
    bound: str | None = None,
    *,
    epsilon: float = DEFAULT_EPSILON,
    c: float | None = None,
    sigma: float = 2.0,
    delta: float = 2.0,
    alpha: float = 1.0,
) -> BoundScanReport:
    """Scan lhs/rhs of one pointwise multiplier bound over a (t, |xi|) lattice.

    The reported ``worst_ratio`` is an empirical constant C.  Points where the
    right-hand side vanishes are counted as ratio 0 when the left-hand side
    vanishes to rounding, and as infinity otherwise.
    """
    t_grid = np.asarray(t_grid, dtype=float).ravel()
    xi_grid = np.asarray(xi_grid, dtype=float).ravel()
    if t_grid.size == 0 or xi_grid.size == 0:
        raise ValueError("t_grid and xi_grid must be nonempty")
    in_zone = _zone_range(zone, epsilon)
    if not np.all(in_zone(xi_grid)):
        raise ValueError(f"xi_grid leaves the {zone} zone")
    bounds = ZONE_BOUNDS[zone]
    if bound is None:
        bound = next(iter(bounds))
    if bound not in bounds:
        raise ValueError(f"unknown bound {bound!r} for zone {zone}; have {sorted(bounds)}")
    opts = {
        "c": _default_c(zone, epsilon) if c is None else float(c),
        "sigma": sigma,
        "delta": delta,
        "alpha": alpha,
    }
    lhs_fn, rhs_fn, form = bounds[bound]
    T, X = np.meshgrid(_check_t(t_grid), xi_grid, indexing="ij")
    lhs = np.asarray(lhs_fn(T, X, opts), dtype=float)
    rhs = np.asarray(rhs_fn(T, X, opts), dtype=float)
    ratio = np.zeros_like(lhs)
    pos = rhs > 0
    ratio[pos] = lhs[pos] / rhs[pos]
    ratio[~pos & (lhs > 1e-14)] = np.inf
    k = np.unravel_index(np.argmax(ratio), ratio.shape)
    return BoundScanReport(
        zone=zone,
        bound_id=bound,
        scanned_points=int(ratio.size),
        worst_ratio=float(ratio[k]),
        argmax_t=float(T[k]),
        argmax_xi=float(X[k]),
        claimed_form=f"{form} (c={opts['c']:.6g})",
    )


def scan_zone(zone: str, t_grid, xi_grid, **kwargs) -> list[BoundScanReport]:
    """Run every registered bound of a zone."""
    return [
        verify_multiplier_bounds(zone, t_grid, xi_grid, bound, **kwargs)
        for bound in ZONE_BOUNDS[zone]
    ]


def write_bound_reports(reports, path) -> Path:
    path = Path(path)
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["zone", "bound_id", "scanned_points", "worst_ratio", "argmax_t", "argmax_xi"])
        for r in reports:
            w.writerow(r.as_row())
    return path

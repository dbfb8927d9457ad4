"""Test-function pair and the weak-solution identity.

For phi(t, x) = chi(t/R^2) varphi(|x|/R), a solution of
u_tt - Laplace u + u_t = N(u) satisfies

    int int N(u) phi + int (u0 + u1) phi(0) = int int u (phi_tt - Laplace phi - phi_t),

because phi_t vanishes at t = 0.  weak_functional evaluates each piece on a
solved trajectory and reports the defect of this identity.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import integrate, stats

from ..evolution import Trajectory, hartree_nonlinearity, power_abs
from ..grid import Grid, RealField, _check_same_grid
from ..profiles import plateau, plateau_derivatives
from ..riesz import RieszParams

__all__ = [
    "TestFunctionPair",
    "WeakFunctional",
    "weak_functional",
    "boundary_term",
    "boundary_growth_exponent",
    "MIN_TIME_SLICES",
]

MIN_TIME_SLICES = 32
PLATEAU_END = 0.5
SUPPORT_END = 1.0


def _profile_derivatives(r):
    """chi, chi', chi'' of the unit plateau (1 on [0, 1/2], 0 beyond 1)."""
    log_v, log_d1, log_d2, sign = plateau_derivatives(r, PLATEAU_END, SUPPORT_END)
    return np.exp(log_v), -np.exp(log_d1), sign * np.exp(log_d2)


@dataclass(frozen=True)
class TestFunctionPair:
    """Smooth cut-offs chi (time) and varphi (space) rescaled by R."""

    R: float
    p_tilde: float

    __test__ = False  # not a pytest class

    def __post_init__(self):
        if self.R <= 0:
            raise ValueError("R must be positive")
        if self.p_tilde <= 1:
            raise ValueError("p_tilde must exceed 1")

    @classmethod
    def from_powers(cls, R: float, p1: float, p2: float) -> "TestFunctionPair":
        return cls(R, (p1 + p2) / 2)

    @property
    def q_tilde(self) -> float:
        return self.p_tilde / (self.p_tilde - 1)

    # time factor chi_R(t) = chi(t / R^2)
    def chi(self, t):
        return plateau(np.asarray(t, dtype=float) / self.R**2, PLATEAU_END, SUPPORT_END)

    def chi_derivatives(self, t):
        """(chi_R, d/dt chi_R, d^2/dt^2 chi_R)."""
        s = np.asarray(t, dtype=float) / self.R**2
        v, d1, d2 = _profile_derivatives(s)
        return v, d1 / self.R**2, d2 / self.R**4

    # space factor varphi_R(x) = varphi(|x| / R)
    def phi(self, grid: Grid) -> np.ndarray:
        return plateau(grid.radius / self.R, PLATEAU_END, SUPPORT_END)

    def laplacian_phi(self, grid: Grid) -> np.ndarray:
        """Radial Laplacian varphi'' + (n-1)/r varphi', analytic."""
        rho = grid.radius / self.R
        _, d1, d2 = _profile_derivatives(rho)
        out = d2.copy()
        if grid.dims > 1:
            # varphi' vanishes on the plateau, so the 1/r term is harmless there
            with np.errstate(divide="ignore", invalid="ignore"):
                out += np.where(rho > 0, (grid.dims - 1) * d1 / np.where(rho > 0, rho, 1.0), 0.0)
        return out / self.R**2

    # finiteness of the Hoelder bounds on the transition region [1/2, 1]
    def _transition_points(self, count: int = 4001) -> np.ndarray:
        u = np.linspace(0.0, 1.0, count)[1:-1]
        return PLATEAU_END + (SUPPORT_END - PLATEAU_END) * 0.5 * (1 - np.cos(np.pi * u))

    def log_time_bound(self) -> float:
        """log of sup over [1/2, 1] of chi^{-q/p} (|chi'|^q + |chi''|^q).

        The supremum grows very fast as p_tilde -> 1, so it is evaluated and
        returned in log form.
        """
        r = self._transition_points()
        log_v, log_d1, log_d2, _ = plateau_derivatives(r, PLATEAU_END, SUPPORT_END)
        q, a = self.q_tilde, self.q_tilde / self.p_tilde
        terms = np.logaddexp(-a * log_v + q * log_d1, -a * log_v + q * log_d2)
        return float(np.max(terms))

    def log_space_bound(self, dims: int) -> float:
        """log of sup over 1/2 <= |x| <= 1 of varphi^{-q/p} |Laplace varphi|^q."""
        r = self._transition_points()
        log_v, log_d1, log_d2, sign = plateau_derivatives(r, PLATEAU_END, SUPPORT_END)
        # Laplace varphi = varphi' * (varphi''/varphi' + (n-1)/r), with varphi' < 0
        ratio = -sign * np.exp(log_d2 - log_d1) + (dims - 1) / r
        with np.errstate(divide="ignore"):
            log_lap = log_d1 + np.log(np.abs(ratio))
        q, a = self.q_tilde, self.q_tilde / self.p_tilde
        return float(np.max(-a * log_v + q * log_lap))


@dataclass(frozen=True)
class WeakFunctional:
    K_R: float
    M_R: float
    boundary: float
    linear_term: float
    residual: float

    @property
    def dominant(self) -> float:
        return max(abs(self.K_R), abs(self.boundary), abs(self.linear_term))

    @property
    def relative_residual(self) -> float:
        d = self.dominant
        return abs(self.residual) / d if d > 0 else 0.0


def boundary_term(u0: RealField, u1: RealField, tf: TestFunctionPair) -> float:
    """int (u0 + u1) varphi_R dx as a Riemann sum."""
    _check_same_grid(u0.grid, u1.grid)
    g = u0.grid
    return float(np.sum((u0.samples + u1.samples) * tf.phi(g)) * g.cell_volume)


def weak_functional(snapshots, data, tf: TestFunctionPair, p1: float, p2: float,
                    gamma: float, *, zero_mode: str = "zero") -> WeakFunctional:
    """K_R, M_R, the data term and the defect of the weak identity.

    ``snapshots`` is a Trajectory carrying snapshots or a mapping time -> RealField.
    The time integrals use the trapezoid rule over the snapshot times, the
    space integrals plain Riemann sums.  The residual is

        int int u (phi_tt - Laplace phi - phi_t) - K_R - int (u0 + u1) phi_R(0),

    so u = 0 gives residual = -boundary.
    """
    if isinstance(snapshots, Trajectory):
        snapshots = snapshots.snapshots
    u0, u1 = data
    g = u0.grid
    if tf.R > 0.8 * g.half_length:
        raise ValueError(f"R = {tf.R} too large for half_length {g.half_length}")
    times = np.array(sorted(snapshots))
    horizon = tf.R**2
    inside = times[times <= horizon * (1 + 1e-12)]
    if inside.size < MIN_TIME_SLICES:
        raise ValueError(f"{inside.size} snapshots in [0, R^2]; need {MIN_TIME_SLICES}")
    if inside[0] > 0 or inside[-1] < horizon * (1 - 1e-9):
        raise ValueError("snapshots must cover [0, R^2]")

    phi = tf.phi(g)
    lap = tf.laplacian_phi(g)
    chi, dchi, d2chi = tf.chi_derivatives(inside)
    params = RieszParams(gamma, g.dims, zero_mode)
    dv = g.cell_volume
    nonlinear, power, linear = (np.empty(inside.size) for _ in range(3))
    for k, t in enumerate(inside):
        u = snapshots[float(t)]
        _check_same_grid(u.grid, g)
        n_val = hartree_nonlinearity(u, p1, p2, params).samples
        nonlinear[k] = np.sum(n_val * phi) * dv * chi[k]
        power[k] = np.sum(power_abs(u.samples, tf.p_tilde) * phi) * dv * chi[k]
        linear[k] = np.sum(u.samples * ((d2chi[k] - dchi[k]) * phi - chi[k] * lap)) * dv
    K_R = float(integrate.trapezoid(nonlinear, inside))
    M_R = float(integrate.trapezoid(power, inside))
    lin = float(integrate.trapezoid(linear, inside))
    bnd = boundary_term(u0, u1, tf)
    return WeakFunctional(K_R, M_R, bnd, lin, lin - K_R - bnd)


def boundary_growth_exponent(u0: RealField, u1: RealField, radii, p_tilde: float = 2.0):
    """Power-law growth of the data term over ``radii``.

    Returns ``(exponent, log_corrected_exponent)``: the least-squares slope of
    log B(R) against log R, and the same slope for B(R) log R.
    """
    radii = np.asarray(radii, dtype=float)
    if radii.size < 3:
        raise ValueError("need at least three radii")
    B = np.array([boundary_term(u0, u1, TestFunctionPair(r, p_tilde)) for r in radii])
    if np.any(B <= 0):
        raise ValueError("boundary term must be positive for a power-law fit")
    x = np.log(radii)
    raw = stats.linregress(x, np.log(B)).slope
    corrected = stats.linregress(x, np.log(B * np.log(radii))).slope
    return float(raw), float(corrected)

"""Linear damped-wave propagation, fractional heat flow and the semilinear solver.

Every Fourier mode of  u_tt - Laplace u + u_t = F  is a damped oscillator.
With A = K0 + K1/2 (A(0) = 1, A'(0) = 0) and B = K1 (B(0) = 0, B'(0) = 1) the
free evolution of a mode from (a, b) over a time h is

    u(h) = A(h) a + B(h) b,      u_t(h) = A'(h) a + B'(h) b,

and a source held constant over the step adds (int_0^h B, B(h)) * F.  The
semilinear solver is the exponential midpoint rule built on these exact
pieces: the linear part carries no time-discretization error at all.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable

import numpy as np

from .grid import (
    Grid,
    RealField,
    SpectralField,
    _check_same_grid,
    _hdot,
    forward_transform,
    save_field,
    synthesize_real,
)
from .multipliers import heat_symbol, k1_time_integral, kernel_time_derivatives, k0_hat, k1_hat
from .riesz import RieszParams, riesz_apply

__all__ = [
    "ModeState",
    "LinearPropagator",
    "Trajectory",
    "NonFiniteError",
    "linear_solve",
    "propagate",
    "linear_trajectory",
    "fractional_heat_solve",
    "power_abs",
    "hartree_nonlinearity",
    "semilinear_solve",
    "wraparound_time",
    "BLOWUP_FACTOR",
]

BLOWUP_FACTOR = 1e6
WRAP_FRACTION = 0.8


class NonFiniteError(ArithmeticError):
    """A field overflowed to inf/nan, the numerical signature of blow-up."""


def wraparound_time(grid: Grid) -> float:
    """Latest time at which waves from the data have not met their periodic images."""
    return WRAP_FRACTION * grid.half_length


@dataclass(frozen=True, eq=False)
class ModeState:
    grid: Grid
    u_hat: np.ndarray = field(repr=False)
    ut_hat: np.ndarray = field(repr=False)
    time: float = 0.0

    def __post_init__(self):
        for name in ("u_hat", "ut_hat"):
            arr = np.asarray(getattr(self, name), dtype=complex).reshape(self.grid.shape)
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)
        if self.time < 0:
            raise ValueError("time must be nonnegative")

    @property
    def u(self) -> RealField:
        return synthesize_real(SpectralField(self.grid, self.u_hat))

    @property
    def ut(self) -> RealField:
        return synthesize_real(SpectralField(self.grid, self.ut_hat))

    def norms(self, alpha: float = 1.0) -> tuple[float, float, float]:
        """(||u||_2, ||u||_{H^alpha}, ||u_t||_2) from the coefficients."""
        g = self.grid
        return _hdot(self.u_hat, g, 0), _hdot(self.u_hat, g, alpha), _hdot(self.ut_hat, g, 0)


class LinearPropagator:
    """Per-mode multipliers of the free evolution and the constant-source increment over a step h."""

    def __init__(self, grid: Grid, h: float):
        if h < 0:
            raise ValueError("step must be nonnegative")
        xi = grid.xi_norm
        self.grid = grid
        self.h = h
        k0, k1 = k0_hat(h, xi), k1_hat(h, xi)
        dk0, dk1 = kernel_time_derivatives(h, xi)
        self.a, self.da = k0 + 0.5 * k1, dk0 + 0.5 * dk1
        self.b, self.db = k1, dk1
        self.source_u = k1_time_integral(h, xi)
        self.source_ut = k1

    def free(self, u_hat, ut_hat):
        return self.a * u_hat + self.b * ut_hat, self.da * u_hat + self.db * ut_hat

    def forced(self, u_hat, ut_hat, source_hat):
        u, ut = self.free(u_hat, ut_hat)
        return u + self.source_u * source_hat, ut + self.source_ut * source_hat


def linear_solve(u0: RealField, u1: RealField, t: float) -> ModeState:
    """Exact solution of the free damped wave equation at time t."""
    _check_same_grid(u0.grid, u1.grid)
    if t < 0:
        raise ValueError("t must be nonnegative")
    prop = LinearPropagator(u0.grid, t)
    u, ut = prop.free(forward_transform(u0).coeffs, forward_transform(u1).coeffs)
    return ModeState(u0.grid, u, ut, float(t))


def propagate(state: ModeState, dt: float) -> ModeState:
    """Advance a mode state by dt under the free evolution."""
    prop = LinearPropagator(state.grid, dt)
    u, ut = prop.free(state.u_hat, state.ut_hat)
    return ModeState(state.grid, u, ut, state.time + dt)


def fractional_heat_solve(u0: RealField, alpha: float, t: float) -> RealField:
    """e^{-t (-Laplace)^alpha} u0, one multiplier per mode."""
    F = forward_transform(u0)
    sym = heat_symbol(t, u0.grid.xi_norm, alpha)
    return synthesize_real(SpectralField(u0.grid, F.coeffs * sym))


# -- trajectories --------------------------------------------------------------


@dataclass
class Trajectory:
    """Norm history of one run; the stepping task is its only writer."""

    alpha: float = 1.0
    times: list = field(default_factory=list)
    l2: list = field(default_factory=list)
    hdot_alpha: list = field(default_factory=list)
    dt_l2: list = field(default_factory=list)
    linf: list = field(default_factory=list)
    snapshots: dict = field(default_factory=dict)
    blown_up: bool = False
    blowup_time: float | None = None

    def record(self, t: float, l2: float, hdot: float, dtl2: float, linf: float):
        if self.times and t <= self.times[-1]:
            raise ValueError("trajectory times must increase")
        self.times.append(float(t))
        self.l2.append(float(l2))
        self.hdot_alpha.append(float(hdot))
        self.dt_l2.append(float(dtl2))
        self.linf.append(float(linf))

    def __len__(self):
        return len(self.times)

    def series(self, name: str) -> np.ndarray:
        """One recorded quantity as an array: l2, hdot_alpha, dt_l2 or linf."""
        if name not in ("l2", "hdot_alpha", "dt_l2", "linf"):
            raise KeyError(name)
        return np.asarray(getattr(self, name), dtype=float)

    @property
    def t(self) -> np.ndarray:
        return np.asarray(self.times, dtype=float)

    def to_csv(self, path) -> Path:
        path = Path(path)
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["t", "l2", "hdot_alpha", "dt_l2", "blown_up"])
            last = len(self.times) - 1
            for k, row in enumerate(zip(self.times, self.l2, self.hdot_alpha, self.dt_l2)):
                flag = int(self.blown_up and k == last)
                w.writerow([repr(v) for v in row] + [flag])
        return path

    def dump_snapshots(self, directory) -> list[Path]:
        directory = Path(directory)
        directory.mkdir(parents=True, exist_ok=True)
        return [
            save_field(f, directory / f"snapshot_t{t:.6f}.bin")
            for t, f in sorted(self.snapshots.items())
        ]


def linear_trajectory(u0: RealField, u1: RealField, times, alpha: float = 1.0,
                      snapshot_times=()) -> Trajectory:
    """Norms of the exact linear solution at the requested times."""
    _check_same_grid(u0.grid, u1.grid)
    g = u0.grid
    c0, c1 = forward_transform(u0).coeffs, forward_transform(u1).coeffs
    traj = Trajectory(alpha=alpha)
    wanted = {float(s) for s in snapshot_times}
    for t in np.asarray(times, dtype=float):
        u, ut = LinearPropagator(g, t).free(c0, c1)
        samples = synthesize_real(SpectralField(g, u))
        traj.record(t, _hdot(u, g, 0), _hdot(u, g, alpha), _hdot(ut, g, 0),
                    float(np.max(np.abs(samples.samples))))
        if float(t) in wanted:
            traj.snapshots[float(t)] = samples
    return traj


# -- nonlinearity --------------------------------------------------------------


def power_abs(samples: np.ndarray, p: float) -> np.ndarray:
    """|u|^p pointwise; exact zero at u = 0, overflow raises NonFiniteError."""
    with np.errstate(over="ignore", invalid="ignore"):
        out = np.power(np.abs(samples), p)
    if not np.all(np.isfinite(out)):
        raise NonFiniteError(f"|u|^{p} overflowed")
    return out


def _dealias(coeffs: np.ndarray, grid: Grid) -> np.ndarray:
    return coeffs * grid.dealias_mask()


def hartree_nonlinearity(u: RealField, p1: float, p2: float, params: RieszParams,
                         *, dealias: bool = True) -> RealField:
    """I_gamma(|u|^p1) |u|^p2.

    The inner power is low-pass filtered (2/3 rule) before the Riesz
    multiplier.  With gamma = 0 the Riesz potential is the identity and the
    product is formed pointwise without a spectral round trip.
    """
    if p1 <= 0 or p2 <= 0:
        raise ValueError("p1 and p2 must be positive")
    if params.dims != u.grid.dims:
        raise ValueError("Riesz parameters and field disagree on dimension")
    inner = power_abs(u.samples, p1)
    outer = power_abs(u.samples, p2)
    if params.gamma > 0:
        F = forward_transform(RealField(u.grid, inner))
        coeffs = _dealias(F.coeffs, u.grid) if dealias else F.coeffs
        inner = synthesize_real(riesz_apply(SpectralField(u.grid, coeffs), params)).samples
    with np.errstate(over="ignore", invalid="ignore"):
        out = inner * outer
    if not np.all(np.isfinite(out)):
        raise NonFiniteError("Hartree term overflowed")
    return RealField(u.grid, out)


# -- semilinear solver ---------------------------------------------------------


def _source_samples(value, grid: Grid) -> np.ndarray:
    if isinstance(value, RealField):
        _check_same_grid(value.grid, grid)
        return value.samples
    return np.broadcast_to(np.asarray(value, dtype=float), grid.shape)


def semilinear_solve(
    u0: RealField,
    u1: RealField,
    p1: float,
    p2: float,
    params: RieszParams,
    T: float,
    dt: float,
    forcing_override: Callable | None = None,
    *,
    alpha: float = 1.0,
    blowup_factor: float = BLOWUP_FACTOR,
    snapshot_every: int | None = None,
    dealias: bool = True,
) -> Trajectory:
    """Solve u_tt - Laplace u + u_t = I_gamma(|u|^p1)|u|^p2 by exponential midpoint stepping.

    Each step of length h:
        predictor   U* = P(h/2) U_n + Phi(h/2) N(U_n, t_n)
        corrector   U_{n+1} = P(h) U_n + Phi(h) N(U*, t_n + h/2)
    where P is the exact free propagator and Phi the exact response to a
    source held constant over the step.  The scheme is second order.

    ``forcing_override(t)`` replaces the nonlinearity by a prescribed source
    (a RealField, an array, or a scalar).  Norms are recorded at every step;
    with ``snapshot_every = k`` every k-th state is also kept.  The run stops
    early with ``blown_up`` set once ||u||_inf exceeds
    ``blowup_factor * (||u0||_inf + 1)`` or the state overflows.
    """
    _check_same_grid(u0.grid, u1.grid)
    if dt <= 0 or T <= 0:
        raise ValueError("T and dt must be positive")
    if dt > T:
        raise ValueError("dt must not exceed T")
    g = u0.grid
    mask = g.dealias_mask() if dealias else 1.0
    threshold = blowup_factor * (float(np.max(np.abs(u0.samples))) + 1.0)

    def source(u_samples: np.ndarray, t: float) -> np.ndarray:
        if forcing_override is not None:
            return forward_transform(RealField(g, _source_samples(forcing_override(t), g))).coeffs
        n = hartree_nonlinearity(RealField(g, u_samples), p1, p2, params, dealias=dealias)
        return forward_transform(n).coeffs * mask

    n_steps = int(round(T / dt))
    if not math.isclose(n_steps * dt, T, rel_tol=1e-9):
        n_steps = math.ceil(T / dt)
    full, half = LinearPropagator(g, dt), LinearPropagator(g, dt / 2)

    u_hat = forward_transform(u0).coeffs
    ut_hat = forward_transform(u1).coeffs
    u_samples = u0.samples
    traj = Trajectory(alpha=alpha)

    def log_state(t, u_hat, ut_hat, u_samples, step):
        traj.record(t, _hdot(u_hat, g, 0), _hdot(u_hat, g, alpha), _hdot(ut_hat, g, 0),
                    float(np.max(np.abs(u_samples))))
        if snapshot_every and step % snapshot_every == 0:
            traj.snapshots[float(t)] = RealField(g, u_samples)

    log_state(0.0, u_hat, ut_hat, u_samples, 0)
    for step in range(1, n_steps + 1):
        t_n = (step - 1) * dt
        try:
            mid_u, _ = half.forced(u_hat, ut_hat, source(u_samples, t_n))
            mid_samples = _real_samples(mid_u, g)
            u_hat, ut_hat = full.forced(u_hat, ut_hat, source(mid_samples, t_n + dt / 2))
            u_samples = _real_samples(u_hat, g)
        except NonFiniteError:
            traj.blown_up, traj.blowup_time = True, t_n + dt
            break
        t = step * dt
        linf = float(np.max(np.abs(u_samples)))
        log_state(t, u_hat, ut_hat, u_samples, step)
        if linf > threshold:
            traj.blown_up, traj.blowup_time = True, t
            break
    return traj


def _real_samples(coeffs: np.ndarray, grid: Grid) -> np.ndarray:
    z = np.fft.ifftn(coeffs * grid._phase) * grid.size
    if not np.all(np.isfinite(z)):
        raise NonFiniteError("state overflowed")
    return z.real

"""Littlewood-Paley blocks, homogeneous Besov norms and heat-flow characterization.

The dyadic window is phi(xi) = chi(|xi|/2) - chi(|xi|), where chi is a smooth
plateau equal to 1 on [0, 3/4] and 0 on [4/3, inf).  Then phi is supported in
the annulus 3/4 <= |xi| <= 8/3 and the rescaled windows telescope:

    sum_{j=a}^{b} phi(xi / 2^j) = chi(xi / 2^{b+1}) - chi(xi / 2^a),

which is exactly 1 for (4/3) 2^a <= |xi| <= (3/4) 2^{b+1}.  The block range
is chosen so that this interval covers every nonzero lattice frequency.  The
mean mode belongs to no block, so all norms here are blind to it, as a
homogeneous norm should be.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from functools import cached_property
from pathlib import Path

import numpy as np

from .grid import Grid, RealField, SpectralField, _lp, forward_transform, synthesize_real
from .profiles import plateau

__all__ = [
    "LPFamily",
    "BesovSpec",
    "lp_window",
    "lp_partition",
    "block_norms",
    "besov_norm",
    "write_block_norms",
    "heat_characterization_norm",
    "heat_decay_profile",
    "data_profile",
    "make_besov_data",
]

WINDOW_INNER = 3.0 / 4.0
WINDOW_OUTER = 8.0 / 3.0
_CHI_EDGE = 4.0 / 3.0
MIN_BLOCKS = 3


def _chi(r):
    return plateau(r, WINDOW_INNER, _CHI_EDGE, log_scale=True)


def lp_window(r):
    """Dyadic window phi(r) = chi(r/2) - chi(r), supported in [3/4, 8/3]."""
    r = np.asarray(r, dtype=float)
    return _chi(r / 2.0) - _chi(r)


@dataclass(frozen=True, eq=False)
class LPFamily:
    """Littlewood-Paley blocks j_min..j_max on a grid's frequency lattice."""

    grid: Grid
    j_min: int
    j_max: int

    @property
    def j_range(self) -> range:
        return range(self.j_min, self.j_max + 1)

    def window(self, j: int) -> np.ndarray:
        """phi(xi / 2^j) on the lattice, FFT order."""
        return lp_window(self.grid.xi_norm / 2.0**j)

    @cached_property
    def windows(self) -> dict:
        return {j: self.window(j) for j in self.j_range}

    @property
    def band(self) -> tuple[float, float]:
        """Frequencies on which the windows sum to one exactly."""
        return _CHI_EDGE * 2.0**self.j_min, WINDOW_INNER * 2.0 ** (self.j_max + 1)

    def partition_residue(self) -> float:
        """max |sum_j phi(xi/2^j) - 1| over nonzero lattice points."""
        total = sum(self.windows.values())
        nz = self.grid.xi_norm > 0
        return float(np.max(np.abs(total[nz] - 1.0)))

    def max_overlap(self) -> int:
        """Largest number of windows that are nonzero at one lattice point."""
        count = sum((w > 0).astype(int) for w in self.windows.values())
        return int(np.max(count))


def lp_partition(grid: Grid) -> LPFamily:
    """Dyadic blocks covering every nonzero lattice frequency.

    j_min is the largest j with (4/3) 2^j <= freq_step and j_max the smallest
    j with (3/4) 2^{j+1} >= max |xi|, so the telescoping sum is exactly one
    from the lowest to the highest lattice frequency.  The top block is cut
    off by the lattice, so block norms near Nyquist are truncated.
    """
    lowest = grid.freq_step
    highest = float(np.max(grid.xi_norm))
    j_min = math.floor(math.log2(lowest / _CHI_EDGE) + 1e-12)
    j_max = math.ceil(math.log2(highest / WINDOW_INNER) - 1e-12) - 1
    if j_max - j_min + 1 < MIN_BLOCKS:
        raise ValueError(
            f"grid resolves only {j_max - j_min + 1} dyadic blocks; need {MIN_BLOCKS}"
        )
    fam = LPFamily(grid, j_min, j_max)
    residue = fam.partition_residue()
    if residue > 1e-10:
        raise RuntimeError(f"partition of unity residue {residue:.2e}")
    if fam.max_overlap() > 2:
        raise RuntimeError("a lattice point lies in more than two windows")
    return fam


@dataclass(frozen=True)
class BesovSpec:
    s: float
    p: float = 2.0
    q: float = math.inf

    def __post_init__(self):
        if not self.p >= 1:
            raise ValueError(f"p must be in [1, inf], got {self.p}")
        if not self.q >= 1:
            raise ValueError(f"q must be in [1, inf], got {self.q}")

    def realizable(self, dims: int) -> bool:
        """s < n/p, the range where the homogeneous space is a space of distributions."""
        return self.s < dims / self.p


def _spectral(f) -> SpectralField:
    return f if isinstance(f, SpectralField) else forward_transform(f)


def block_norms(f, spec: BesovSpec, fam: LPFamily) -> tuple[np.ndarray, np.ndarray]:
    """Dyadic indices j and weighted block norms 2^{js} ||Delta_j f||_p."""
    F = _spectral(f)
    if F.grid != fam.grid:
        raise ValueError("field and LP family live on different grids")
    g = fam.grid
    js = np.array(list(fam.j_range))
    vals = np.empty(js.size)
    for k, j in enumerate(js):
        block = F.coeffs * fam.windows[j]
        if spec.p == 2:
            # discrete Parseval; identical to the Riemann sum of the projection
            norm = math.sqrt(float(np.sum(np.abs(block) ** 2)) * g.volume)
        else:
            samples = synthesize_real(SpectralField(g, block)).samples
            norm = _lp(samples, g.cell_volume, spec.p)
        vals[k] = 2.0 ** (j * spec.s) * norm
    return js, vals


def besov_norm(f, spec: BesovSpec, fam: LPFamily) -> float:
    """l^q over the resolvable blocks of 2^{js} ||Delta_j f||_p (a truncated norm)."""
    _, vals = block_norms(f, spec, fam)
    if math.isinf(spec.q):
        return float(np.max(vals))
    return float(np.sum(vals**spec.q) ** (1.0 / spec.q))


def write_block_norms(f, spec: BesovSpec, fam: LPFamily, path) -> Path:
    path = Path(path)
    js, vals = block_norms(f, spec, fam)
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["j", "weighted_block_norm"])
        for j, v in zip(js, vals):
            w.writerow([int(j), repr(float(v))])
    return path


# -- heat-flow characterization ----------------------------------------------


class _HeatEnergy:
    """||e^{t Laplace} f||_2^2 on R^n for the box data extended by zero.

    The torus flow conserves the mean and so never decays like the flow on
    the whole space; zero extension gives the free-space quantity instead.
    The data are padded to twice the box, which holds their autocorrelation
    without wrap-around.  For small t the padded lattice sum of
    |F|^2 e^{-2t|xi|^2} is used; its periodic images of the heat kernel are
    below e^{-40} while t <= L^2 / 80.  For larger t the kernel is wide on
    the grid scale and the energy is summed in real space as
    sum_d A(d) G_{2t}(d), with A the discrete autocorrelation.
    """

    def __init__(self, F: SpectralField):
        g = F.grid
        samples = synthesize_real(F).samples
        n = g.points_per_dim
        padded = np.zeros((2 * n,) * g.dims)
        padded[(slice(0, n),) * g.dims] = samples
        power = np.abs(np.fft.fftn(padded)) ** 2
        self.grid = g
        self.cell = g.cell_volume
        self.power = power
        self.xi2 = sum(
            k**2 for k in np.meshgrid(*[np.fft.fftfreq(2 * n, d=g.spacing) * 2 * np.pi] * g.dims,
                                      indexing="ij")
        )
        self.autocorr = np.fft.ifftn(power).real * self.cell
        self.offsets = np.fft.fftfreq(2 * n, d=1.0 / (2 * n)) * g.spacing
        self.switch = g.half_length**2 / 80

    def __call__(self, t: float) -> float:
        if t <= self.switch:
            return float(np.sum(self.power * np.exp(-2 * t * self.xi2)) * self.cell / self.power.size)
        var = 4 * t
        g1 = np.exp(-self.offsets**2 / (2 * var)) / np.sqrt(2 * np.pi * var)
        kernel = g1
        for _ in range(self.grid.dims - 1):
            kernel = np.multiply.outer(kernel, g1)
        return float(np.sum(self.autocorr * kernel) * self.cell)


def heat_decay_profile(f, t_grid) -> np.ndarray:
    """||e^{t Laplace} f||_2 at each t, for f extended by zero outside the box."""
    energy = _HeatEnergy(_spectral(f))
    t = np.asarray(t_grid, dtype=float).ravel()
    if np.any(t < 0):
        raise ValueError("t must be nonnegative")
    return np.sqrt(np.maximum([energy(tk) for tk in t], 0.0))


def heat_characterization_norm(f, delta: float, t_grid) -> float:
    """max over t of t^{delta/2} ||e^{t Laplace} f||_2 (free-space flow, see
    :func:`heat_decay_profile`).

    ``t_grid`` must be positive and span at least three decades.
    """
    if delta <= 0:
        raise ValueError(f"delta must be positive, got {delta}")
    t = np.asarray(t_grid, dtype=float).ravel()
    if t.size == 0:
        raise ValueError("t_grid is empty")
    if np.any(t <= 0):
        raise ValueError("t_grid must be positive")
    if t.max() / t.min() < 1e3 * (1 - 1e-12):
        raise ValueError("t_grid must span at least three decades")
    return float(np.max(t ** (delta / 2) * heat_decay_profile(f, t)))


# -- data with prescribed low-frequency behaviour ----------------------------


def data_profile(r, dims: int, beta: float):
    """<x>^{-(n/2 + beta)} / log(e + |x|) as a function of r = |x|."""
    r = np.asarray(r, dtype=float)
    return (1 + r * r) ** (-(dims / 2 + beta) / 2) / np.log(np.e + r)


def make_besov_data(grid: Grid, beta: float, amplitude: float) -> RealField:
    """Sample amplitude * <x>^{-(n/2+beta)} / log(e+|x|).

    This profile lies in L^{2n/(n+2 beta)} and hence in the negative-order
    space B^{-beta}_{2,inf}.  For beta > 0 the heat characterization with
    delta = beta is evaluated once as a finiteness check.
    """
    n = grid.dims
    if not 0 <= beta < n / 2:
        raise ValueError(f"beta must lie in [0, {n / 2}), got {beta}")
    f = RealField(grid, amplitude * data_profile(grid.radius, n, beta))
    if beta > 0 and amplitude != 0:
        check = heat_characterization_norm(f, beta, np.logspace(-2, 3, 26))
        if not math.isfinite(check):
            raise RuntimeError("heat characterization of the generated data is not finite")
    return f

"""Periodic grids, discrete Fourier transforms and Lebesgue norms.

The continuum domain R^n (n = 1, 2) is replaced by the box [-L, L)^n with
periodic boundary conditions.  Sample ``j`` along an axis sits at
``x_j = -L + j h`` with ``h = 2L / N``; the frequency lattice is
``xi_k = k pi / L`` for ``k`` in ``[-N/2, N/2)``.

Fourier coefficients are normalized as the coefficients of the Fourier series

    f(x) = sum_k c_k exp(i xi_k . x),

so a constant field ``c`` has the single coefficient ``c`` at ``xi = 0`` (the
spatial mean) and Parseval reads ``||f||_2^2 = (2L)^n sum_k |c_k|^2``.
Coefficient arrays are stored in numpy FFT order.
"""

from __future__ import annotations

import csv
import struct
from dataclasses import dataclass, field
from functools import cached_property
from pathlib import Path

import numpy as np

__all__ = [
    "Grid",
    "RealField",
    "SpectralField",
    "make_grid",
    "forward_transform",
    "inverse_transform",
    "synthesize_real",
    "lp_norm",
    "hdot_norm",
    "save_field",
    "load_field",
    "field_to_csv",
    "random_band_limited",
]

#: tolerance on the imaginary residue of an inverse transform, relative to max |f|
SYMMETRY_TOL = 1e-10


def _is_power_of_two(n: int) -> bool:
    return n > 0 and (n & (n - 1)) == 0


@dataclass(frozen=True)
class Grid:
    """Uniform periodic grid on [-L, L)^dims."""

    dims: int
    points_per_dim: int
    half_length: float

    def __post_init__(self):
        if self.dims not in (1, 2):
            raise ValueError(f"dims must be 1 or 2, got {self.dims}")
        n = self.points_per_dim
        if not isinstance(n, (int, np.integer)) or not _is_power_of_two(int(n)):
            raise ValueError(f"points_per_dim must be a power of two, got {n}")
        if n < 8:
            raise ValueError(f"points_per_dim must be >= 8, got {n}")
        if not self.half_length > 0 or not np.isfinite(self.half_length):
            raise ValueError(f"half_length must be positive, got {self.half_length}")

    @property
    def spacing(self) -> float:
        return 2.0 * self.half_length / self.points_per_dim

    @property
    def freq_step(self) -> float:
        return np.pi / self.half_length

    @property
    def shape(self) -> tuple[int, ...]:
        return (self.points_per_dim,) * self.dims

    @property
    def size(self) -> int:
        return self.points_per_dim**self.dims

    @property
    def cell_volume(self) -> float:
        return self.spacing**self.dims

    @property
    def volume(self) -> float:
        return (2.0 * self.half_length) ** self.dims

    @cached_property
    def axis(self) -> np.ndarray:
        """Sample positions along one axis."""
        return -self.half_length + self.spacing * np.arange(self.points_per_dim)

    @cached_property
    def coords(self) -> tuple[np.ndarray, ...]:
        """Coordinate arrays broadcast to ``shape`` (``indexing='ij'``)."""
        return tuple(np.meshgrid(*([self.axis] * self.dims), indexing="ij"))

    @cached_property
    def radius(self) -> np.ndarray:
        return np.sqrt(sum(c**2 for c in self.coords))

    @cached_property
    def wave_indices(self) -> np.ndarray:
        """Integer lattice index k per FFT slot, in [-N/2, N/2)."""
        n = self.points_per_dim
        return np.fft.fftfreq(n, d=1.0 / n).astype(np.int64)

    @cached_property
    def wavenumbers(self) -> tuple[np.ndarray, ...]:
        """Frequency components xi_i broadcast to ``shape``, FFT order."""
        k = self.wave_indices * self.freq_step
        return tuple(np.meshgrid(*([k] * self.dims), indexing="ij"))

    @cached_property
    def xi_norm(self) -> np.ndarray:
        """|xi| on the lattice, FFT order."""
        return np.sqrt(sum(k**2 for k in self.wavenumbers))

    @cached_property
    def _phase(self) -> np.ndarray:
        # exp(i xi_k L) = (-1)^k accounts for the grid starting at x = -L
        signs = np.where(self.wave_indices % 2 == 0, 1.0, -1.0)
        out = signs
        for _ in range(self.dims - 1):
            out = np.multiply.outer(out, signs)
        return out

    def frequency_of(self, index) -> np.ndarray:
        """Frequency vector of an FFT-order index (tuple or int)."""
        idx = np.atleast_1d(index)
        if idx.size != self.dims:
            raise ValueError(f"expected {self.dims} indices, got {idx.size}")
        return self.wave_indices[idx % self.points_per_dim] * self.freq_step

    def index_of(self, frequency) -> tuple[int, ...]:
        """FFT-order index of a lattice frequency; inverse of ``frequency_of``."""
        xi = np.atleast_1d(np.asarray(frequency, dtype=float))
        k = np.rint(xi / self.freq_step).astype(np.int64)
        if not np.allclose(k * self.freq_step, xi, rtol=0, atol=1e-9 * self.freq_step):
            raise ValueError(f"{frequency} is not on the frequency lattice")
        n = self.points_per_dim
        if np.any(k < -n // 2) or np.any(k >= n // 2):
            raise ValueError(f"{frequency} is outside the resolved band")
        return tuple(int(v) for v in k % n)

    def dealias_mask(self, fraction: float = 2.0 / 3.0) -> np.ndarray:
        """Boolean mask keeping |k_i| <= fraction * N/2 on every axis."""
        keep = np.abs(self.wave_indices) <= fraction * (self.points_per_dim // 2)
        out = keep
        for _ in range(self.dims - 1):
            out = np.logical_and.outer(out, keep)
        return out


def make_grid(dims: int, points_per_dim: int, half_length: float) -> Grid:
    """Build a validated :class:`Grid`."""
    return Grid(int(dims), int(points_per_dim), float(half_length))


@dataclass(frozen=True, eq=False)
class RealField:
    grid: Grid
    samples: np.ndarray = field(repr=False)

    def __post_init__(self):
        arr = np.asarray(self.samples, dtype=float)
        if arr.size != self.grid.size:
            raise ValueError(
                f"expected {self.grid.size} samples, got {arr.size}"
            )
        arr = arr.reshape(self.grid.shape)
        if not np.all(np.isfinite(arr)):
            raise ValueError("field samples must be finite")
        arr.setflags(write=False)
        object.__setattr__(self, "samples", arr)

    def __mul__(self, scalar):
        return RealField(self.grid, self.samples * scalar)

    __rmul__ = __mul__

    def __add__(self, other: "RealField"):
        _check_same_grid(self.grid, other.grid)
        return RealField(self.grid, self.samples + other.samples)

    def __sub__(self, other: "RealField"):
        _check_same_grid(self.grid, other.grid)
        return RealField(self.grid, self.samples - other.samples)

    @classmethod
    def from_function(cls, grid: Grid, func) -> "RealField":
        """Sample ``func(*coords)`` on the grid."""
        return cls(grid, np.broadcast_to(func(*grid.coords), grid.shape))

    @classmethod
    def zeros(cls, grid: Grid) -> "RealField":
        return cls(grid, np.zeros(grid.shape))


@dataclass(frozen=True, eq=False)
class SpectralField:
    grid: Grid
    coeffs: np.ndarray = field(repr=False)

    def __post_init__(self):
        arr = np.asarray(self.coeffs, dtype=complex).reshape(self.grid.shape)
        arr.setflags(write=False)
        object.__setattr__(self, "coeffs", arr)

    def coefficient(self, frequency) -> complex:
        return complex(self.coeffs[self.grid.index_of(frequency)])

    def symmetry_defect(self) -> float:
        """max |c(-xi) - conj(c(xi))| relative to max |c|.

        The Nyquist slot k = -N/2 is paired with itself (aliasing).
        """
        c = self.coeffs
        flipped = c
        for ax in range(c.ndim):
            flipped = np.roll(np.flip(flipped, axis=ax), 1, axis=ax)
        diff = np.abs(flipped - np.conj(c))
        scale = np.max(np.abs(c))
        if scale == 0:
            return 0.0
        return float(np.max(diff) / scale)


def _check_same_grid(a: Grid, b: Grid):
    if a != b:
        raise ValueError(f"grid mismatch: {a} vs {b}")


def forward_transform(f: RealField) -> SpectralField:
    """Fourier-series coefficients of a sampled field."""
    g = f.grid
    coeffs = np.fft.fftn(f.samples) / g.size * g._phase
    return SpectralField(g, coeffs)


def inverse_transform(F: SpectralField, *, allow_complex: bool = False):
    """Synthesize samples from coefficients.

    Returns a :class:`RealField`.  If the coefficients do not represent a
    real field (imaginary residue above ``SYMMETRY_TOL`` relative to the
    largest sample) a ``ValueError`` is raised, unless ``allow_complex`` is
    set, in which case the raw complex sample array is returned.
    """
    g = F.grid
    z = np.fft.ifftn(F.coeffs * g._phase) * g.size
    scale = np.max(np.abs(z)) if z.size else 0.0
    residue = np.max(np.abs(z.imag)) if z.size else 0.0
    if scale > 0 and residue > SYMMETRY_TOL * scale:
        if allow_complex:
            return z
        raise ValueError(
            f"coefficients are not conjugate-symmetric (imaginary residue {residue:.3e})"
        )
    return RealField(g, z.real)


def synthesize_real(F: SpectralField) -> RealField:
    """Inverse transform for coefficients that are real by construction.

    A real, even multiplier applied to the transform of a real field gives a
    real field; the imaginary part left by round-off is dropped instead of
    tested, since it can dominate once the field itself has decayed to
    round-off level.
    """
    g = F.grid
    z = np.fft.ifftn(F.coeffs * g._phase) * g.size
    return RealField(g, z.real)


def _lp(samples: np.ndarray, cell_volume: float, p: float) -> float:
    a = np.abs(samples)
    if np.isinf(p):
        return float(np.max(a))
    if p == 2:
        return float(np.sqrt(np.sum(a * a) * cell_volume))
    # rescale before the power to keep large p from overflowing
    m = np.max(a)
    if m == 0:
        return 0.0
    return float(m * (np.sum((a / m) ** p) * cell_volume) ** (1.0 / p))


def lp_norm(f: RealField, p: float) -> float:
    """Riemann-sum L^p norm on the box; ``p = np.inf`` gives the max."""
    if not (p >= 1):
        raise ValueError(f"p must be >= 1 or inf, got {p}")
    return _lp(f.samples, f.grid.cell_volume, p)


def hdot_norm(f, s: float) -> float:
    """Homogeneous Sobolev seminorm (sum |xi|^{2s} |c_xi|^2 (2L)^n)^{1/2}.

    Accepts a :class:`RealField` or :class:`SpectralField`.  For ``s != 0``
    the mean mode is excluded.
    """
    F = f if isinstance(f, SpectralField) else forward_transform(f)
    return _hdot(F.coeffs, F.grid, s)


def _hdot(coeffs: np.ndarray, grid: Grid, s: float) -> float:
    power = np.abs(coeffs) ** 2
    if s != 0:
        xi = grid.xi_norm
        weight = np.zeros_like(xi)
        nz = xi > 0
        weight[nz] = xi[nz] ** (2 * s)
        power = power * weight
    return float(np.sqrt(np.sum(power) * grid.volume))


def random_band_limited(grid: Grid, rng: np.random.Generator, max_freq: float,
                        *, zero_mean: bool = True) -> RealField:
    """White noise low-pass filtered to |xi| <= max_freq, scaled to unit L^2 norm."""
    noise = RealField(grid, rng.standard_normal(grid.shape))
    F = forward_transform(noise)
    keep = grid.xi_norm <= max_freq
    if zero_mean:
        keep &= grid.xi_norm > 0
    f = synthesize_real(SpectralField(grid, F.coeffs * keep))
    norm = lp_norm(f, 2)
    if norm == 0:
        raise ValueError("no lattice frequencies in the requested band")
    return f * (1.0 / norm)


# -- serialization -----------------------------------------------------------

_HEADER = struct.Struct("<qqd")


def save_field(f: RealField, path) -> Path:
    """Write the flat little-endian binary layout: (dims, N, L) + float64 payload."""
    path = Path(path)
    g = f.grid
    with open(path, "wb") as fh:
        fh.write(_HEADER.pack(g.dims, g.points_per_dim, g.half_length))
        fh.write(np.ascontiguousarray(f.samples, dtype="<f8").tobytes(order="C"))
    return path


def load_field(path) -> RealField:
    raw = Path(path).read_bytes()
    if len(raw) < _HEADER.size:
        raise ValueError("truncated field file")
    dims, n, half_length = _HEADER.unpack_from(raw)
    grid = make_grid(dims, n, half_length)
    payload = np.frombuffer(raw, dtype="<f8", offset=_HEADER.size)
    if payload.size != grid.size:
        raise ValueError(f"payload has {payload.size} values, expected {grid.size}")
    return RealField(grid, payload.astype(float))


def field_to_csv(f: RealField, path) -> Path:
    """Debug dump: one row per sample, index columns then value."""
    path = Path(path)
    cols = ["i", "j"][: f.grid.dims] + ["value"]
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(cols)
        for idx in np.ndindex(*f.grid.shape):
            w.writerow([*idx, repr(float(f.samples[idx]))])
    return path

"""Empirical ratio checks for the Hardy-Littlewood-Sobolev and fractional
Gagliardo-Nirenberg inequalities on lattice fields."""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from ..grid import RealField, SpectralField, _lp, forward_transform, lp_norm, synthesize_real
from ..riesz import RieszParams, riesz_apply

__all__ = ["RatioReport", "check_hls", "check_gn", "gn_exponent", "hls_target_exponent",
           "sobolev_lp_norm"]


@dataclass(frozen=True)
class RatioReport:
    name: str
    ratios: np.ndarray
    parameters: dict

    @property
    def max_ratio(self) -> float:
        return float(np.max(self.ratios))

    @property
    def passed(self) -> bool:
        return bool(np.all(np.isfinite(self.ratios)))

    def quantiles(self, qs=(0.0, 0.5, 1.0)) -> np.ndarray:
        return np.quantile(self.ratios, qs)

    def to_csv(self, path) -> Path:
        path = Path(path)
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["sample_id", "ratio"])
            for k, r in enumerate(self.ratios):
                w.writerow([k, repr(float(r))])
        return path


def hls_target_exponent(gamma: float, m2: float, dims: int) -> float:
    """m1 from 1/m1 = 1/m2 - gamma/n (inf or negative-order cases give <= 0 reciprocal)."""
    inv = 1.0 / m2 - gamma / dims
    return math.inf if inv == 0 else 1.0 / inv


def check_hls(samples, gamma: float, m2: float) -> RatioReport:
    """||I_gamma f||_{m1} / ||f||_{m2} for each sample, 1/m1 = 1/m2 - gamma/n."""
    samples = list(samples)
    if not samples:
        raise ValueError("no samples")
    n = samples[0].grid.dims
    if not 0 < gamma < n:
        raise ValueError(f"gamma must lie in (0, {n})")
    inv = 1.0 / m2 - gamma / n
    m1 = hls_target_exponent(gamma, m2, n)
    if not (1 < m2 and inv > 0 and m2 < m1 < math.inf):
        raise ValueError(f"need 1 < m2 < m1 < inf; m2 = {m2} gives m1 = {m1}")
    params = RieszParams(gamma, n)
    ratios = []
    for f in samples:
        potential = synthesize_real(riesz_apply(forward_transform(f), params))
        ratios.append(lp_norm(potential, m1) / lp_norm(f, m2))
    return RatioReport("hls", np.array(ratios), {"gamma": gamma, "m2": m2, "m1": m1})


def gn_exponent(theta: float, a: float, p: float, p0: float, p1: float, dims: int) -> float:
    """omega(theta, a) = (1/p0 - 1/p + theta/n) / (1/p0 - 1/p1 + a/n)."""
    return (1 / p0 - 1 / p + theta / dims) / (1 / p0 - 1 / p1 + a / dims)


def sobolev_lp_norm(f: RealField, order: float, p: float) -> float:
    """|| F^{-1}(|xi|^order f_hat) ||_p; order 0 is the plain L^p norm."""
    if order == 0:
        return lp_norm(f, p)
    F = forward_transform(f)
    xi = f.grid.xi_norm
    sym = np.where(xi > 0, xi, 0.0) ** order
    d = synthesize_real(SpectralField(f.grid, F.coeffs * sym))
    return _lp(d.samples, f.grid.cell_volume, p)


def check_gn(samples, theta: float, a: float, p: float, p0: float, p1: float) -> RatioReport:
    """||u||_{H^theta_p} / (||u||_{p0}^{1-omega} ||u||_{H^a_p1}^omega) per sample.

    The derivatives are lattice multipliers |xi|^theta and |xi|^a.
    """
    samples = list(samples)
    if not samples:
        raise ValueError("no samples")
    if not all(1 < v < math.inf for v in (p, p0, p1)):
        raise ValueError("p, p0, p1 must lie in (1, inf)")
    if a <= 0 or not 0 <= theta < a:
        raise ValueError("need a > 0 and 0 <= theta < a")
    n = samples[0].grid.dims
    omega = gn_exponent(theta, a, p, p0, p1, n)
    if not theta / a - 1e-12 <= omega <= 1 + 1e-12:
        raise ValueError(f"omega = {omega:.6g} outside [theta/a, 1] = [{theta / a:.6g}, 1]")
    ratios = []
    for u in samples:
        top = sobolev_lp_norm(u, theta, p)
        bottom = lp_norm(u, p0) ** (1 - omega) * sobolev_lp_norm(u, a, p1) ** omega
        ratios.append(top / bottom)
    return RatioReport("gn", np.array(ratios),
                       {"theta": theta, "a": a, "p": p, "p0": p0, "p1": p1, "omega": omega})

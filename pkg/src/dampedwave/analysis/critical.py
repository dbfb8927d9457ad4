"""Critical exponent and the (p1, p2) criticality sweep."""

from __future__ import annotations

import csv
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

from ..besov import make_besov_data
from ..evolution import BLOWUP_FACTOR, WRAP_FRACTION, semilinear_solve, wraparound_time
from ..grid import lp_norm, make_grid
from ..riesz import RieszParams
from .rates import detect_blowup, xt_norm

__all__ = [
    "CriticalParams",
    "critical_exponent",
    "SolverConfig",
    "SweepRow",
    "SweepReport",
    "sweep_criticality",
    "OUTCOMES",
]

OUTCOMES = ("decayed", "grew", "blown_up")


@dataclass(frozen=True)
class CriticalParams:
    """Dimension, data regularity beta and Riesz order gamma.

    beta = n/2 is admitted as the L^1 endpoint (m_beta = 1); with gamma = 0
    the exponent there is the classical Fujita value 1 + 2/n.
    """

    n: int
    beta: float = 0.0
    gamma: float = 0.0

    def __post_init__(self):
        if int(self.n) != self.n or self.n < 1:
            raise ValueError(f"n must be a positive integer, got {self.n}")
        if not 0 <= self.beta <= self.n / 2:
            raise ValueError(f"beta must lie in [0, n/2] = [0, {self.n / 2}], got {self.beta}")
        if not 0 <= self.gamma < self.n:
            raise ValueError(f"gamma must lie in [0, {self.n}), got {self.gamma}")

    @property
    def m_beta(self) -> float:
        return 2 * self.n / (self.n + 2 * self.beta)

    @property
    def p_fuji(self) -> float:
        return 1 + (4 + 2 * self.gamma) / (self.n + 2 * self.beta)


def critical_exponent(params: CriticalParams) -> float:
    """Threshold value of p1 + p2 separating blow-up from small-data global existence."""
    return params.p_fuji


@dataclass(frozen=True)
class SolverConfig:
    points_per_dim: int = 1024
    half_length: float = 128.0
    T: float = 100.0
    dt: float = 0.05
    alpha: float = 1.0
    blowup_factor: float = BLOWUP_FACTOR
    threads: int = 1
    zero_mode: str = "zero"

    def __post_init__(self):
        if self.T > WRAP_FRACTION * self.half_length:
            raise ValueError(
                f"T = {self.T} exceeds the wrap-around guard {WRAP_FRACTION * self.half_length}"
            )
        if self.threads < 1:
            raise ValueError("threads must be at least 1")


@dataclass(frozen=True)
class SweepRow:
    p1: float
    p2: float
    outcome: str
    detect_time: float | None
    final_l2: float
    xt_norm: float
    note: str = ""

    @property
    def p_sum(self) -> float:
        return self.p1 + self.p2


@dataclass
class SweepReport:
    params: CriticalParams
    config: SolverConfig
    amplitude: float
    rows: list = field(default_factory=list)

    @property
    def p_fuji(self) -> float:
        return self.params.p_fuji

    def outcome(self, p1: float, p2: float) -> str:
        for r in self.rows:
            if (r.p1, r.p2) == (p1, p2):
                return r.outcome
        raise KeyError((p1, p2))

    def to_csv(self, path) -> Path:
        path = Path(path)
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["p1", "p2", "p_sum", "p_fuji", "outcome", "detect_time",
                        "final_l2", "xt_norm", "note"])
            for r in self.rows:
                w.writerow([r.p1, r.p2, r.p_sum, self.p_fuji, r.outcome,
                            "" if r.detect_time is None else repr(r.detect_time),
                            repr(r.final_l2), repr(r.xt_norm), r.note])
        return path

    def write_heatmap(self, path) -> Path:
        """gnuplot-ready ``p1 p2 code`` triples; code 0 decayed, 1 grew, 2 blown_up, -1 error."""
        path = Path(path)
        with open(path, "w") as fh:
            fh.write("# p1 p2 outcome_code\n")
            for r in self.rows:
                code = OUTCOMES.index(r.outcome) if r.outcome in OUTCOMES else -1
                fh.write(f"{r.p1!r} {r.p2!r} {code}\n")
        return path


def _classify(traj, reference_l2: float, beta: float, threshold: float):
    """Blown up, grew (final L^2 >= reference) or decayed (below it, finite X(T) norm)."""
    norm = xt_norm(traj, beta)
    if traj.blown_up:
        return "blown_up", detect_blowup(traj, threshold), norm
    final = traj.l2[-1]
    if final >= reference_l2:
        return "grew", None, norm
    if math.isfinite(norm):
        return "decayed", None, norm
    return "grew", None, norm


def _note(p_sum: float, p_fuji: float, outcome: str) -> str:
    if p_sum < p_fuji:
        if outcome == "decayed":
            return "decay within the window below p_fuji; blow-up may come later"
        return "consistent with the blow-up regime"
    if outcome == "decayed":
        return "consistent with small-data global existence"
    return "no decay at this amplitude; the small-data theory makes no claim"


def _run_point(p1, p2, params, config, u0, reference_l2, threshold):
    rp = RieszParams(params.gamma, params.n, config.zero_mode)
    traj = semilinear_solve(u0, u0, p1, p2, rp, config.T, config.dt,
                            alpha=config.alpha, blowup_factor=config.blowup_factor)
    outcome, detect_time, norm = _classify(traj, reference_l2, params.beta, threshold)
    note = _note(p1 + p2, params.p_fuji, outcome)
    return SweepRow(p1, p2, outcome, detect_time, float(traj.l2[-1]), float(norm), note)


def sweep_criticality(params: CriticalParams, p_grid, data_amplitude: float,
                      config: SolverConfig | None = None) -> SweepReport:
    """Solve from make_besov_data(beta) with u1 = u0 for every (p1, p2) and classify.

    ``reference_l2`` is ||u0||_2 + ||u1||_2: the free evolution tends to the heat
    flow of u0 + u1, so a solution that merely follows the linear dynamics can
    rise toward that level before it decays.  With u1 = u0 the "grew" test is
    the factor-2 comparison against the initial L^2 norm.
    """
    config = config or SolverConfig()
    if params.n not in (1, 2):
        raise ValueError("simulations run on 1-d or 2-d grids")
    grid = make_grid(params.n, config.points_per_dim, config.half_length)
    if config.T > wraparound_time(grid) + 1e-12:
        raise ValueError("T exceeds the wrap-around guard")
    u0 = make_besov_data(grid, params.beta, data_amplitude)
    reference_l2 = 2 * lp_norm(u0, 2)
    threshold = config.blowup_factor * (lp_norm(u0, math.inf) + 1.0)
    report = SweepReport(params, config, data_amplitude)

    pairs = [(float(a), float(b)) for a, b in p_grid]
    for p1, p2 in pairs:
        if p1 <= 0 or p2 <= 0:
            raise ValueError(f"p1, p2 must be positive, got {(p1, p2)}")

    def task(pair):
        p1, p2 = pair
        try:
            return _run_point(p1, p2, params, config, u0, reference_l2, threshold)
        except Exception as exc:  # recorded per row, never aborts the sweep
            return SweepRow(p1, p2, "error", None, math.nan, math.nan, f"{type(exc).__name__}: {exc}")

    with ThreadPoolExecutor(max_workers=config.threads) as pool:
        rows = list(pool.map(task, pairs))
    report.rows = sorted(rows, key=lambda r: (r.p1, r.p2))
    return report

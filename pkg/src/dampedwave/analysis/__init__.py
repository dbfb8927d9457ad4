"""Decay fits, criticality sweeps, the weak-solution functional and inequality checks."""

from .critical import (
    OUTCOMES,
    CriticalParams,
    SolverConfig,
    SweepReport,
    SweepRow,
    critical_exponent,
    sweep_criticality,
)
from .inequalities import (
    RatioReport,
    check_gn,
    check_hls,
    gn_exponent,
    hls_target_exponent,
    sobolev_lp_norm,
)
from .rates import XTNorm, detect_blowup, fit_decay_rate, xt_norm
from .weak import (
    TestFunctionPair,
    WeakFunctional,
    boundary_growth_exponent,
    boundary_term,
    weak_functional,
)

__all__ = [
    "OUTCOMES",
    "CriticalParams",
    "SolverConfig",
    "SweepReport",
    "SweepRow",
    "critical_exponent",
    "sweep_criticality",
    "RatioReport",
    "check_gn",
    "check_hls",
    "gn_exponent",
    "hls_target_exponent",
    "sobolev_lp_norm",
    "XTNorm",
    "detect_blowup",
    "fit_decay_rate",
    "xt_norm",
    "TestFunctionPair",
    "WeakFunctional",
    "boundary_growth_exponent",
    "boundary_term",
    "weak_functional",
]

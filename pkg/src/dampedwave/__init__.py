"""Pseudospectral lab for the damped wave equation with a Hartree nonlinearity.

Submodules:

* grid          periodic grids, transforms, Lebesgue and Sobolev norms
* multipliers   exact Fourier kernels of the damped wave and heat semigroups
* riesz         Riesz potentials, spectral and by direct quadrature
* besov         Littlewood-Paley blocks, Besov norms, heat characterization
* evolution     linear propagation and the semilinear exponential integrator
* analysis      decay fits, criticality sweeps, weak form, inequality checks
* cli           config-driven experiment runner
"""

__version__ = "0.1.0"

from .grid import (
    Grid,
    RealField,
    SpectralField,
    forward_transform,
    hdot_norm,
    inverse_transform,
    lp_norm,
    make_grid,
    random_band_limited,
)
from .multipliers import heat_symbol, k0_hat, k1_hat, kernel_time_derivatives, verify_multiplier_bounds
from .riesz import RieszParams, riesz_apply, riesz_direct
from .besov import BesovSpec, LPFamily, besov_norm, heat_characterization_norm, lp_partition, make_besov_data
from .evolution import (
    ModeState,
    Trajectory,
    fractional_heat_solve,
    hartree_nonlinearity,
    linear_solve,
    linear_trajectory,
    propagate,
    semilinear_solve,
)

__all__ = [
    "Grid", "RealField", "SpectralField", "forward_transform", "hdot_norm", "inverse_transform",
    "lp_norm", "make_grid", "random_band_limited",
    "heat_symbol", "k0_hat", "k1_hat", "kernel_time_derivatives", "verify_multiplier_bounds",
    "RieszParams", "riesz_apply", "riesz_direct",
    "BesovSpec", "LPFamily", "besov_norm", "heat_characterization_norm", "lp_partition",
    "make_besov_data",
    "ModeState", "Trajectory", "fractional_heat_solve", "hartree_nonlinearity", "linear_solve",
    "linear_trajectory", "propagate", "semilinear_solve",
]

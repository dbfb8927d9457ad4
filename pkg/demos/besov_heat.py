"""Dyadic blocks against the heat semigroup.

For a few random band-limited fields the negative-order Besov norm from
Littlewood-Paley blocks is compared with sup_t t^{delta/2} ||e^{t Laplace} f||_2.
The two agree up to a constant that does not depend on the grid.
"""

import math

import numpy as np

from dampedwave.besov import BesovSpec, besov_norm, heat_characterization_norm, lp_partition
from dampedwave.grid import make_grid, random_band_limited


def main():
    grid = make_grid(1, 512, 32.0)
    family = lp_partition(grid)
    print(f"blocks j = {family.j_range.start}..{family.j_range.stop - 1}, "
          f"partition residue {family.partition_residue():.1e}")
    rng = np.random.default_rng(0)
    t_grid = np.logspace(-3, 4, 141)
    for delta in (0.5, 1.0):
        ratios = []
        for _ in range(10):
            f = random_band_limited(grid, rng, 4.0)
            dyadic = besov_norm(f, BesovSpec(-delta, 2, math.inf), family)
            ratios.append(heat_characterization_norm(f, delta, t_grid) / dyadic)
        print(f"delta {delta}: heat / dyadic in [{min(ratios):.3f}, {max(ratios):.3f}]")


if __name__ == "__main__":
    main()

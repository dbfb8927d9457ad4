"""Linear and small-data decay of the damped wave equation.

Data with prescribed low-frequency weight <x>^{-(1/2+beta)} / log(e+|x|) is
evolved on a long 1-d box.  The fitted slopes of ||u||_2, ||u||_{H^1} and
||u_t||_2 against log(1+t) are printed next to the rates -beta/2,
-(beta+1)/2 and -beta/2-1.
"""

import argparse

import numpy as np

from dampedwave.analysis import fit_decay_rate
from dampedwave.besov import make_besov_data
from dampedwave.evolution import linear_trajectory, semilinear_solve
from dampedwave.grid import make_grid
from dampedwave.plotdata import write_columns
from dampedwave.riesz import RieszParams


def main():
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--betas", type=float, nargs="+", default=[0.0, 0.25, 0.4])
    parser.add_argument("--amplitude", type=float, default=1e-2)
    parser.add_argument("--plot-data", default=None, help="write t and ||u||_2 columns here")
    args = parser.parse_args()

    grid = make_grid(1, 4096, 256.0)
    window = (5.0, 150.0)
    print(f"{'beta':>6} {'series':>10} {'linear':>9} {'hartree':>9} {'rate':>7}")
    for beta in args.betas:
        u0 = make_besov_data(grid, beta, args.amplitude)
        linear = linear_trajectory(u0, u0, np.linspace(*window, 146))
        traj = semilinear_solve(u0, u0, 3.0, 3.0, RieszParams(0.5, 1), window[1], 0.05)
        rates = {"l2": -beta / 2, "hdot_alpha": -(beta + 1) / 2, "dt_l2": -beta / 2 - 1}
        for name, rate in rates.items():
            lin = fit_decay_rate((linear.t, linear.series(name)), window)[0]
            non = fit_decay_rate((traj.t, traj.series(name)), window)[0]
            print(f"{beta:6.2f} {name:>10} {lin:9.4f} {non:9.4f} {rate:7.3f}")
        if args.plot_data:
            write_columns(f"{args.plot_data}_beta{beta:g}.dat", traj.t, traj.series("l2"),
                          header="t l2")


if __name__ == "__main__":
    main()

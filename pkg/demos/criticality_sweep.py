"""Blow-up below the critical sum, decay above it.

A (p1, p2) grid is swept in 1-d with gamma = 0, where the critical sum
p1 + p2 is 5.  Large data below it blows up; small data above it decays.
"""

import argparse

import numpy as np

from dampedwave.analysis import CriticalParams, SolverConfig, sweep_criticality


def main():
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--threads", type=int, default=4)
    parser.add_argument("--csv", default=None, help="write the combined report here")
    args = parser.parse_args()

    params = CriticalParams(1, beta=0.0, gamma=0.0)
    config = SolverConfig(1024, 128.0, 100.0, 0.05, threads=args.threads)
    powers = np.arange(1.0, 4.01, 0.5)
    grid = [(a, b) for a in powers for b in powers]
    for amplitude in (1.0, 1e-2):
        report = sweep_criticality(params, grid, amplitude, config)
        print(f"amplitude {amplitude:g}, p_fuji = {report.p_fuji:g}")
        for row in report.rows:
            side = "<" if row.p_sum < report.p_fuji else ">="
            print(f"  p1={row.p1:3.1f} p2={row.p2:3.1f}  sum {side} p_fuji  {row.outcome:9s}  {row.note}")
        if args.csv:
            report.to_csv(f"{args.csv}_amp{amplitude:g}.csv")


if __name__ == "__main__":
    main()

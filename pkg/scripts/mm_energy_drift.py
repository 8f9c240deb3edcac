"""Energy drift of the two integrators against the step size.

Leapfrog drift scales as dt^2 and the fourth-order composition as dt^4;
the printed slopes make the orders visible.
"""

import argparse
import csv
import math
import sys

from moduli_quanta import matrix_model as mm


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--N", type=int, default=2)
    parser.add_argument("--seed", type=int, default=11)
    parser.add_argument("--time", type=float, default=2.0, help="total evolution time")
    parser.add_argument("--dt", type=float, nargs="+", default=[4e-3, 2e-3, 1e-3, 5e-4])
    args = parser.parse_args()

    cfg = mm.random_config(args.N, args.seed)
    out = csv.writer(sys.stdout)
    out.writerow(["scheme", "dt", "steps", "energy_drift", "gauss_drift", "slope"])
    for scheme in mm.SCHEMES:
        previous = None
        for dt in args.dt:
            steps = round(args.time / dt)
            traj = mm.evolve(cfg, dt, steps, stride=max(steps // 200, 1), scheme=scheme)
            drift = traj.relative_energy_drift()
            slope = ""
            if previous is not None and drift > 0 and previous[1] > 0:
                slope = f"{math.log(previous[1] / drift) / math.log(previous[0] / dt):.2f}"
            out.writerow([scheme, dt, steps, f"{drift:.3e}", f"{traj.gauss_charge_drift:.3e}", slope])
            previous = (dt, drift)


if __name__ == "__main__":
    main()

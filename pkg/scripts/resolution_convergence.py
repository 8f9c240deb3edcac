"""Resolution-of-identity error as the angular and radial grids are refined.

Occupations 0..K are compared. The angular sum is exact once there are more
than K angles, and Gauss-Laguerre in |z|^2 is exact once 2 * radial > K, so
the error collapses to round-off past both thresholds.
"""

import argparse
import csv
import sys

from moduli_quanta import fock_boson as fb


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--M", type=int, default=30)
    parser.add_argument("--K", type=int, default=10)
    parser.add_argument("--radial", type=int, nargs="+", default=[4, 5, 6, 8, 64])
    parser.add_argument("--angular", type=int, nargs="+", default=[8, 10, 12, 16, 128])
    args = parser.parse_args()

    fock = fb.build_fock(1, args.M)
    out = csv.writer(sys.stdout)
    out.writerow(["radial", "angular", "max_deviation"])
    for radial in args.radial:
        for angular in args.angular:
            rule = fb.QuadratureRule.gauss_laguerre(radial, angular)
            out.writerow([radial, angular, f"{fb.resolution_check(fock, rule, args.K):.3e}"])


if __name__ == "__main__":
    main()

"""Old-mode quanta in the squeezed vacuum versus squeeze parameter and cutoff."""

import argparse
import csv
import math
import sys

import numpy as np

from moduli_quanta import fock_boson as fb
from moduli_quanta import moduli as md
from moduli_quanta.errors import CutoffError


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--r", type=float, nargs="+", default=list(np.linspace(0.0, 1.0, 11)))
    parser.add_argument("--M", type=int, nargs="+", default=[20, 40, 80])
    args = parser.parse_args()

    out = csv.writer(sys.stdout)
    out.writerow(["r", "M", "mean_old_quanta", "sinh2_r", "abs_error", "leakage", "status"])
    for M in args.M:
        fock = fb.build_fock(1, M)
        for r in args.r:
            exact = math.sinh(r) ** 2
            try:
                vac = fb.bogoliubov_vacuum(fock, md.single_mode_squeeze_rs(r))
            except CutoffError as exc:
                out.writerow([f"{r:.4g}", M, "", f"{exact:.12g}", "", f"{exc.residual:.3e}",
                              "cutoff"])
                continue
            out.writerow([f"{r:.4g}", M, f"{vac.mean_old_quanta:.12g}", f"{exact:.12g}",
                          f"{abs(vac.mean_old_quanta - exact):.3e}", f"{vac.leakage:.3e}", "ok"])


if __name__ == "__main__":
    main()

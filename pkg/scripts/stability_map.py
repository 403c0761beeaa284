#!/usr/bin/env python3
"""Sweep the (k1, k2) gain plane and compare criterion vs eigenvalue verdicts."""

import math
import sys
from pathlib import Path

import numpy as np

from nonholo.analysis import stability_grid
from nonholo.params import VehicleParams


def main() -> int:
    out = Path(sys.argv[1]) if len(sys.argv) > 1 else Path("out")
    out.mkdir(parents=True, exist_ok=True)
    params = VehicleParams()
    k1 = np.linspace(-2.0, 0.5, 50)
    k2 = np.linspace(-0.05, 0.1, 50)
    dest = out / "stability.csv"
    total = agreed = 0
    with open(dest, "w", encoding="utf-8") as fh:
        fh.write("k1,k2,kappa_star,criterion,eig_max_real,agree\n")
        for kappa in (0.0, 1.0 / 200.0, 0.004 * math.pi):
            for k1v, k2v, crit, eig, agree, near in stability_grid(
                    k1, k2, kappa, 20.0, params.l):
                fh.write(f"{k1v:.12g},{k2v:.12g},{kappa:.12g},"
                         f"{int(crit)},{eig:.12g},{int(agree)}\n")
                if not near:
                    total += 1
                    agreed += int(agree)
    print(f"{agreed}/{total} points agree outside the boundary band; "
          f"wrote {dest}")
    return 0 if agreed == total else 1


if __name__ == "__main__":
    sys.exit(main())

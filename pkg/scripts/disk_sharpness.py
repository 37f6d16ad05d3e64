"""Disk: exact and FEM values of mu_{k+2}, mu_{k+3} against lambda_k.

The shift of two is sharp at k = 1 because mu_4 > lambda_1.
"""

import argparse
from dataclasses import dataclass

from neudir.analytic import disk_spectrum
from neudir.geometry import builtin_domain, triangulate
from neudir.verify import check_inequality, level_spectra


@dataclass
class DiskConfig:
    vertices: int = 256
    level: int = 4
    k_max: int = 6


def _table(title, rep):
    print(title)
    for r in rep.records:
        # j'_{0,k} = j_{1,k}, so exact ties mu_{k+3} = lambda_k occur
        tie = abs(r.mu_k3 - r.lambda_k) <= 1e-9 * r.lambda_k
        status = "tie" if tie else ("fails" if r.shift3_exceeds else "holds")
        print(f"  k={r.k}  mu_k+2={r.mu_k2:8.4f}  lambda_k={r.lambda_k:8.4f}  "
              f"mu_k+3={r.mu_k3:8.4f}  shift 3: {status}")


def main(cfg: DiskConfig):
    exact = check_inequality(disk_spectrum("neumann", cfg.k_max + 3),
                             disk_spectrum("dirichlet", cfg.k_max), cfg.k_max)
    _table("exact disk", exact)
    mesh = triangulate(builtin_domain(f"disk:{cfg.vertices}"), cfg.level)
    neu, dir_ = level_spectra(mesh, cfg.k_max + 3, cfg.k_max)
    _table(f"FEM disk:{cfg.vertices} level {cfg.level} ({mesh.n_points} vertices)",
           check_inequality(neu, dir_, cfg.k_max))


if __name__ == "__main__":
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--vertices", type=int, default=256)
    ap.add_argument("--level", type=int, default=4)
    ap.add_argument("--kmax", type=int, default=6)
    a = ap.parse_args()
    main(DiskConfig(a.vertices, a.level, a.kmax))

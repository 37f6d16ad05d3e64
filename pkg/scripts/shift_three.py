"""Exploration: for which k does mu_{k+3} < lambda_k hold on perturbed disks?

Domains are polygons sampling r(t) = 1 + eps cos(m t).  A shift of three is
impossible at k = 1 on the disk itself; this scans small perturbations.
"""

import argparse
import math
from dataclasses import dataclass

import numpy as np

from neudir.geometry import make_polygon, triangulate
from neudir.verify import check_inequality, level_spectra


@dataclass
class ShiftConfig:
    vertices: int = 128
    level: int = 3
    k_max: int = 8
    mode: int = 3
    eps: tuple = (0.0, 0.02, 0.05, 0.1, 0.2)


def perturbed_disk(eps, mode, n):
    t = 2 * math.pi * np.arange(n) / n
    r = 1 + eps * np.cos(mode * t)
    return make_polygon(np.column_stack([r * np.cos(t), r * np.sin(t)]),
                        name=f"disk_m{mode}_eps{eps}")


def main(cfg: ShiftConfig):
    print("eps    k with mu_k+3 < lambda_k")
    for eps in cfg.eps:
        mesh = triangulate(perturbed_disk(eps, cfg.mode, cfg.vertices), cfg.level)
        neu, dir_ = level_spectra(mesh, cfg.k_max + 3, cfg.k_max)
        rep = check_inequality(neu, dir_, cfg.k_max)
        ks = [r.k for r in rep.records if not r.shift3_exceeds]
        print(f"{eps:<6} {ks}")


if __name__ == "__main__":
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--mode", type=int, default=3)
    ap.add_argument("--level", type=int, default=3)
    a = ap.parse_args()
    main(ShiftConfig(mode=a.mode, level=a.level))

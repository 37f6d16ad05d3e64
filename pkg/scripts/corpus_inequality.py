"""Inequality study over the polygon corpus: verdicts and relative gaps per k."""

import argparse
import time
from dataclasses import dataclass, field
from pathlib import Path

from neudir.geometry import builtin_domain, load_polygon
from neudir.verify import inequality_study

DATA = Path(__file__).resolve().parents[1] / "tests" / "data"


@dataclass
class CorpusConfig:
    k_max: int = 8
    domains: dict = field(default_factory=lambda: {
        "square": [4, 5], "hexagon": [4, 5], "lshape": [4, 5], "disk:64": [3, 4],
        "star12": [4, 5],
    })


def main(cfg: CorpusConfig):
    for name, levels in cfg.domains.items():
        poly = load_polygon(DATA / f"{name}.json") if name == "star12" else builtin_domain(name)
        t0 = time.perf_counter()
        study = inequality_study(poly, levels, cfg.k_max)
        dt = time.perf_counter() - t0
        print(f"{name}  levels {levels}  {dt:.1f} s")
        for r, v in zip(study.finest.records, study.final_verdicts):
            print(f"  k={r.k:2d}  mu_k+2={r.mu_k2:9.4f}  lambda_k={r.lambda_k:9.4f}  "
                  f"rel gap={r.gap / r.lambda_k:6.3f}  {v}")


if __name__ == "__main__":
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--kmax", type=int, default=8)
    args = ap.parse_args()
    main(CorpusConfig(k_max=args.kmax))

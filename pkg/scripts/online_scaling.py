"""Online time of a parametric factorization as the number of points grows.

Usage::

    python scripts/online_scaling.py --counts 1000 10000 100000 --eps 1e-4
"""

from __future__ import annotations

import argparse
import time
from dataclasses import dataclass
from math import sqrt

import numpy as np

from pttk.chebyshev import Interval
from pttk.kernels import KernelOracle, KernelSpec, ProblemGeometry, cube
from pttk.parametric import offline, online


@dataclass(frozen=True)
class ScalingConfig:
    kernel: str = "squared-exponential"
    counts: tuple = (1_000, 10_000, 100_000)
    n: int = 32
    eps: float = 1e-4
    theta_samples: int = 200
    repeats: int = 5
    seed: int = 0


def run(cfg: ScalingConfig) -> list:
    box = (Interval(sqrt(3) / 2, sqrt(3)),)
    geom = ProblemGeometry(cube(0, 1, 3), cube(1, 2, 3), box)
    rng = np.random.default_rng(cfg.seed)
    thetas = rng.uniform(box[0].lo, box[0].hi, (cfg.theta_samples, 1))
    rows = []
    for count in cfg.counts:
        X = rng.uniform(0, 1, (count, 3))
        Y = rng.uniform(1, 2, (count, 3))
        t0 = time.perf_counter()
        f = offline(KernelOracle(KernelSpec(cfg.kernel), geom), X, Y, n=cfg.n, eps=cfg.eps, seed=cfg.seed)
        off = time.perf_counter() - t0
        best = np.inf
        for _ in range(cfg.repeats):
            t0 = time.perf_counter()
            for th in thetas:
                online(f, th)
            best = min(best, time.perf_counter() - t0)
        rows.append((count, off, best / len(thetas), f.ranks))
    return rows


def main(argv=None) -> int:
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("--counts", type=int, nargs="+", default=list(ScalingConfig.counts))
    p.add_argument("--eps", type=float, default=ScalingConfig.eps)
    p.add_argument("--seed", type=int, default=0)
    args = p.parse_args(argv)
    cfg = ScalingConfig(counts=tuple(args.counts), eps=args.eps, seed=args.seed)
    print(f"{'N':>9} {'offline s':>10} {'online ms':>10}  ranks")
    for count, off, on, ranks in run(cfg):
        print(f"{count:>9} {off:>10.2f} {on * 1e3:>10.3f}  {ranks}")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())

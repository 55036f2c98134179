"""Monte Carlo error against the closed-form memoryless factor.

Doubling the trajectory count should shrink the standard error by sqrt(2)
while the deviation stays within a few standard errors.
"""
import argparse

import numpy as np

from dephasing_geometry.model import NoiseParams, uniform_grid
from dephasing_geometry.oracles import MarkovFactor, McConfig, mc_F


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--nu", type=float, default=0.5)
    ap.add_argument("--a", type=float, default=0.0)
    ap.add_argument("--seed", type=int, default=1)
    ap.add_argument("--workers", type=int, default=1)
    ap.add_argument("--max-traj", type=int, default=100_000)
    args = ap.parse_args()

    p = NoiseParams(nu=args.nu, lam=1.0, kappa=np.inf, a=args.a)
    grid = uniform_grid(10.0, 1001)
    ref = MarkovFactor(p).F(grid.samples)
    print(f"{'n_traj':>8} {'max SE':>10} {'max |dev|':>10} {'max z':>7}")
    n = 1000
    while n <= args.max_traj:
        est = mc_F(p, McConfig(n_traj=n, seed=args.seed, workers=args.workers), grid)
        dev = np.abs(est.F - ref)
        z = dev[1:] / est.stderr[1:]
        print(f"{n:8d} {est.stderr.max():10.3e} {dev.max():10.3e} {z.max():7.2f}")
        n *= 2


if __name__ == "__main__":
    main()

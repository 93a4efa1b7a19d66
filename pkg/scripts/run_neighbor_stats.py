#!/usr/bin/env python3
"""Neighbor-count statistics of converged configurations in a square.

Converges n agents from random seeds in a unit square, then tabulates
how many agents have each number of tessellation neighbors.
"""

import argparse
import sys
from collections import Counter

from swarmcover.control import ControlConfig
from swarmcover.domain import StaticScript
from swarmcover.engine import simulate_to_convergence
from swarmcover.geometry import ConvexPolygon
from swarmcover.scenario import ScenarioConfig
from swarmcover.tessellation import neighbor_histogram, voronoi_partition

SQUARE = ConvexPolygon.from_points([(0, 0), (1, 0), (1, 1), (0, 1)])


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--agents", type=int, default=100)
    parser.add_argument("--seeds", default="11,12,13,14,15",
                        help="comma-separated RNG seeds")
    parser.add_argument("--tol", type=float, default=2e-3,
                        help="aggregated-error threshold for convergence")
    parser.add_argument("--max-steps", type=int, default=1200,
                        help="step cap for slow-annealing configurations")
    args = parser.parse_args(argv)

    seeds = [int(s) for s in args.seeds.split(",") if s]
    pooled = Counter()
    for seed in seeds:
        cfg = ScenarioConfig(
            n_agents=args.agents,
            domain=StaticScript(SQUARE),
            control=ControlConfig(kappa=1.0, law="tvd_d1"),
            dt=0.05,
            duration=0.0,
            rng_seed=seed,
            integrator="euler",
        )
        pos = simulate_to_convergence(cfg, tol=args.tol,
                                      max_steps=args.max_steps)
        hist = neighbor_histogram(voronoi_partition(pos, SQUARE))
        pooled.update(hist)
        mode = max(hist, key=hist.get)
        line = "  ".join(f"{d}:{c}" for d, c in sorted(hist.items()))
        print(f"seed {seed}: mode {mode}  [{line}]")

    print("average per seed:")
    for degree in sorted(pooled):
        print(f"  {degree} neighbors: {pooled[degree] / len(seeds):.1f}")
    return 0


if __name__ == "__main__":
    sys.exit(main())

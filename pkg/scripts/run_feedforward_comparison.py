#!/usr/bin/env python3
"""Compare steady-state coverage error with and without feedforward.

Runs the given scenario once per seed for each arm and prints the
trailing-window mean of the aggregated error plus the on/off ratio.
"""

import argparse
import csv
import sys
import time
from dataclasses import replace
from pathlib import Path

from swarmcover.engine import run, steady_state_mean
from swarmcover.scenario import load

DEFAULT_SCENARIO = (
    Path(__file__).resolve().parents[1] / "scenarios" / "circle100.json"
)


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("scenario", nargs="?", default=str(DEFAULT_SCENARIO),
                        help="scenario JSON file")
    parser.add_argument("--seeds", default="1,2,3",
                        help="comma-separated RNG seeds")
    parser.add_argument("--window", type=float, default=15.0,
                        help="trailing window for the steady-state mean (s)")
    parser.add_argument("--csv", help="optional output CSV path")
    args = parser.parse_args(argv)

    base = load(args.scenario)
    seeds = [int(s) for s in args.seeds.split(",") if s]
    rows = []
    for seed in seeds:
        t0 = time.monotonic()
        means = {}
        for ff in (True, False):
            cfg = replace(base, rng_seed=seed,
                          control=replace(base.control, feedforward=ff))
            means[ff] = steady_state_mean(run(cfg), args.window)
        ratio = means[True] / means[False]
        rows.append((seed, means[True], means[False], ratio))
        print(f"seed {seed}: on {means[True]:.4f}  off {means[False]:.4f}  "
              f"ratio {ratio:.3f}  ({time.monotonic() - t0:.0f} s)")

    mean_ratio = sum(r[3] for r in rows) / len(rows)
    print(f"mean ratio over {len(rows)} seeds: {mean_ratio:.3f}")
    if args.csv:
        with open(args.csv, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(["seed", "e_a_feedforward", "e_a_baseline",
                             "ratio"])
            writer.writerows(rows)
        print(f"wrote {args.csv}")
    return 0


if __name__ == "__main__":
    sys.exit(main())

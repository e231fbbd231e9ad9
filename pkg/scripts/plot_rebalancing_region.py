#!/usr/bin/env python3
"""Emit rebalancing-region figures for several placements of p and r.

For each configuration the shaded region is the set of intermediate
states q for which rebalancing at q does not beat holding through,
i.e. T(q|p) + T(r|q) <= T(r|p).  Points on the boundary close
right-angled geodesic triangles.
"""

import argparse
from pathlib import Path

import numpy as np

from lgeo.cli import emit_region, parse_generator_spec

CONFIGS = [
    ("center", [1 / 3, 1 / 3, 1 / 3], [1 / 3, 1 / 3, 1 / 3]),
    ("split", [0.5, 0.25, 0.25], [0.2, 0.3, 0.5]),
    ("edge", [0.6, 0.3, 0.1], [0.1, 0.6, 0.3]),
    ("near", [0.4, 0.35, 0.25], [0.3, 0.4, 0.3]),
]


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--gen", default="eq3", help="generator spec (n = 3)")
    ap.add_argument("--resolution", type=int, default=160)
    ap.add_argument("--outdir", default="region_figures")
    args = ap.parse_args()

    gen = parse_generator_spec(args.gen)
    outdir = Path(args.outdir)
    outdir.mkdir(parents=True, exist_ok=True)
    for label, p, r in CONFIGS:
        out = outdir / f"region_{label}.svg"
        sample = emit_region(gen, np.array(p), np.array(r),
                             args.resolution, out, fmt="svg")
        share = float(np.mean(sample.in_region))
        print(f"{label:>7}: {share:6.1%} of the grid inside -> {out}")


if __name__ == "__main__":
    main()

"""Render the Top/Bottom basin picture of the physical cylinder as a PGM."""

import argparse
import json
import time

from dhl.dynamics import ClassifyConfig, basin_grid

ap = argparse.ArgumentParser(description=__doc__)
ap.add_argument("--res", type=int, nargs=2, default=(1024, 512), metavar=("W", "H"))
ap.add_argument("--max-iter", type=int, default=500)
ap.add_argument("--threads", type=int, default=8)
ap.add_argument("--out", default="basins.pgm")
args = ap.parse_args()

t0 = time.perf_counter()
g = basin_grid(*args.res, cfg=ClassifyConfig(max_iter=args.max_iter), workers=args.threads)
with open(args.out, "wb") as fh:
    fh.write(g.to_pgm())
stats = g.stats()
stats.update(seconds=round(time.perf_counter() - t0, 3),
             top_share={t: g.top_fraction_row(t) for t in (0.6, 0.8, 0.95)})
print(json.dumps(stats, indent=1))

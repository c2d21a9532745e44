"""Compare level-n zero histograms with the limiting density at one temperature.

Writes CSV columns phi, rho, and one empirical density column per level.
"""

import argparse
import sys

import numpy as np

from dhl.core_maps import TWO_PI
from dhl.dynamics import density_array, density_cdf
from dhl.zeros import cdf_distance, empirical_distribution, find_zeros

ap = argparse.ArgumentParser(description=__doc__)
ap.add_argument("--t", type=float, default=0.15)
ap.add_argument("--levels", type=int, nargs="+", default=[3, 4, 5, 6])
ap.add_argument("--bins", type=int, default=256)
args = ap.parse_args()

centres = (np.arange(args.bins) + 0.5) * TWO_PI / args.bins
cols = [centres, np.nan_to_num(density_array(centres, args.t))]
cdf = density_cdf(args.t) if args.t < 1 else None
for n in args.levels:
    zs = find_zeros(args.t, n)
    cols.append(empirical_distribution(zs, args.bins).mass * args.bins)
    if cdf is not None:
        print(f"n={n} KS={cdf_distance(zs, cdf):.3e}", file=sys.stderr)
print("phi,rho," + ",".join(f"n{n}" for n in args.levels))
for row in np.column_stack(cols).tolist():
    print(",".join(repr(x) for x in row))

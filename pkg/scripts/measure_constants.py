#!/usr/bin/env python3
"""Measure the empirical constants of the lab and write them to one JSON
record: the tube neighborhood constant A1, the core projection constant A,
the Loomis-Whitney ratio ceiling over the shape zoo, the horizontal Sobolev
ratio ceiling over the function zoo, and the normalized incidence ratio band
of the sharpness families.
"""

import json
import math
import sys

from geomlab.generators import gen_rectangle_example, gen_tube_example
from geomlab.heisenberg import (Plane, VerticalPlanePoint,
                                measure_core_projection_constant,
                                tube_inclusion_check)
from geomlab.incidence import count_bucketed
from geomlab.measure import lw_ratio, shape_zoo, voxelize
from geomlab.planar import Scale
from geomlab.sobolev import function_zoo, gns_check


def main() -> int:
    out = {}
    a1 = 0.0
    for dexp in (4, 6, 8, 10):
        s = Scale(2.0 ** -dexp)
        for w in (VerticalPlanePoint(Plane.W_X, 0.0, 0.0),
                  VerticalPlanePoint(Plane.W_X, 0.31, -0.47),
                  VerticalPlanePoint(Plane.W_Y, -0.2, 0.6)):
            a1 = max(a1, tube_inclusion_check(w, s))
    out["A1_tube_neighborhood"] = a1
    out["A_core_projection"] = measure_core_projection_constant(Scale(2.0 ** -6))

    out["lw_ratio_ceiling"] = max(
        lw_ratio(voxelize(sh, 1 / 48)) for sh in shape_zoo().values())
    out["gns_ratio_ceiling"] = max(
        gns_check(f).ratio for f in function_zoo(1 / 64).values())

    ratios = []
    for dexp in range(6, 13):
        delta = 2.0 ** -dexp
        P, L = gen_tube_example(delta)
        ratios.append(count_bucketed(P, L, Scale(delta)).normalized_ratio)
    for dexp in range(4, 8):
        delta = 2.0 ** -dexp
        P, L = gen_rectangle_example(delta, 1.0, math.sqrt(delta))
        ratios.append(count_bucketed(P, L, Scale(delta)).normalized_ratio)
    out["incidence_ratio_min"] = min(ratios)
    out["incidence_ratio_max"] = max(ratios)

    print(json.dumps(out, indent=2, sort_keys=True))
    with open("out_constants.json", "w") as fh:
        json.dump(out, fh, indent=2, sort_keys=True)
        fh.write("\n")
    return 0


if __name__ == "__main__":
    sys.exit(main())

#!/usr/bin/env python3
"""Mesh sizes of the adaptive two-zone continuation run.

Continues the Troesch problem with the I / SP1.FP2 layout and adaptive
refinement until Newton fails, recording the mesh size at every lambda.
"""

import argparse
import pathlib
import sys

from stiffbvp import (GrowthZoneStrategy, RefinementConfig, SrnConfig,
                      StopCriterion, run_continuation, troesch,
                      write_srn_result)


def main(argv=None):
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--out-dir", default="results")
    parser.add_argument("--h-min", type=float, default=0.01)
    parser.add_argument("--h-max", type=float, default=0.1)
    parser.add_argument("--M", type=float, default=0.1)
    parser.add_argument("--lambda-cap", type=float, default=200.0)
    args = parser.parse_args(argv)
    out_dir = pathlib.Path(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    cfg = SrnConfig(
        strategy=GrowthZoneStrategy(), stop=StopCriterion.CONVERGENCE,
        refinement=RefinementConfig(M=args.M, h_min=args.h_min,
                                    h_max=args.h_max),
        h0=args.h_max, lambda_cap=args.lambda_cap, progress=True)
    result = run_continuation(troesch, cfg)
    path = out_dir / "mesh_growth_two_zone.csv"
    write_srn_result(result, path)
    sizes = [row["mesh_size"] for row in result.per_lambda]
    print(f"reached lambda={result.srn}, mesh sizes "
          f"{min(sizes)}..{max(sizes)} -> {path}")
    return 0


if __name__ == "__main__":
    sys.exit(main())

#!/usr/bin/env python3
"""Stiffness-resistance numbers of fixed-mesh identity configurations.

Runs lambda-continuation on the Troesch family with the identity strategy
on uniform meshes (h = 0.1 and 0.01) under both stop criteria and writes
one CSV per configuration.
"""

import argparse
import pathlib
import sys

from stiffbvp import (SrnConfig, StopCriterion, run_continuation, troesch,
                      write_srn_result)


def main(argv=None):
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--out-dir", default="results")
    parser.add_argument("--steps", default="0.1,0.01",
                        help="comma-separated uniform mesh steps")
    args = parser.parse_args(argv)
    out_dir = pathlib.Path(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    for h in (float(s) for s in args.steps.split(",")):
        for stop in (StopCriterion.ACCURACY, StopCriterion.CONVERGENCE):
            cfg = SrnConfig(h0=h, stop=stop, progress=True)
            result = run_continuation(troesch, cfg)
            name = f"srn_identity_h{h:g}_{stop.value}.csv"
            write_srn_result(result, out_dir / name)
            print(f"h={h:g} stop={stop.value}: SRN={result.srn} "
                  f"-> {out_dir / name}")
    return 0


if __name__ == "__main__":
    sys.exit(main())

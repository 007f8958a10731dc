#!/usr/bin/env python3
"""Relative endpoint-derivative errors across lambda for several configs.

Compares the identity strategy on fixed uniform meshes against the
adaptive two-zone configuration; one CSV per configuration.
"""

import argparse
import pathlib
import sys

from stiffbvp import (ContinuationOracle, GrowthZoneStrategy,
                      IdentityStrategy, RefinementConfig, error_curve,
                      troesch, write_error_curve)


def main(argv=None):
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--out-dir", default="results")
    parser.add_argument("--lambdas", default="2,3,4,5,6,7,8")
    args = parser.parse_args(argv)
    out_dir = pathlib.Path(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    lambdas = [float(s) for s in args.lambdas.split(",")]
    oracle = ContinuationOracle(troesch, progress=True)

    configs = {
        "identity_h1e-2": dict(strategy=IdentityStrategy(), h0=0.01),
        "identity_h1e-3": dict(strategy=IdentityStrategy(), h0=0.001),
        "two_zone_h1e-3": dict(
            strategy=GrowthZoneStrategy(), h0=0.01,
            rcfg=RefinementConfig(M=0.1, h_min=1e-3, h_max=1e-3)),
    }
    for name, kwargs in configs.items():
        rows = error_curve(troesch, lambdas, oracle=oracle, progress=True,
                           **kwargs)
        path = out_dir / f"errors_{name}.csv"
        write_error_curve(rows, path)
        print(f"{name} -> {path}")
    return 0


if __name__ == "__main__":
    sys.exit(main())

#!/usr/bin/env python3
"""Generate the normalized information-matrix sweep data for the two
localization panels (angular: H_ss and H_xx vs s at p = 0 and p = 2;
axial: H_pp and H_zz vs p at s = 0 and s = 1), as four CSV files.

Values are normalized to N = k / (2 z_R).  Plot with any CSV-aware tool,
e.g. column H_xx against column s.
"""

import argparse
import sys
from pathlib import Path

from srloc.cli import main as srloc_main

PANELS = [
    ("angular_p0.csv", "s", 0.0),
    ("angular_p2.csv", "s", 2.0),
    ("axial_s0.csv", "p", 0.0),
    ("axial_s1.csv", "p", 1.0),
]


def main(argv=None):
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--outdir", default="localization_data", help="output directory")
    parser.add_argument("--k", type=float, default=1.0, help="wavenumber")
    parser.add_argument("--zr", type=float, default=2.0, help="Rayleigh-type length")
    parser.add_argument("--step", type=float, default=0.01, help="grid resolution")
    parser.add_argument("--stop", type=float, default=5.0, help="sweep end point")
    args = parser.parse_args(argv)

    outdir = Path(args.outdir)
    outdir.mkdir(parents=True, exist_ok=True)
    for filename, swept, fixed in PANELS:
        out = outdir / filename
        code = srloc_main(
            [
                "sweep",
                "--k", str(args.k),
                "--zr", str(args.zr),
                "--sweep", swept,
                "--range", f"{args.step}:{args.stop}:{args.step}",
                "--fixed", str(fixed),
                "--normalized",
                "--out", str(out),
            ]
        )
        if code != 0:
            return code
        print(f"wrote {out}")
    return 0


if __name__ == "__main__":
    sys.exit(main())

#!/usr/bin/env python3
"""Sweep the two-parameter informativeness family on an 11x11 grid and
write the 3CharM / MIG / DCI surface to sweep.csv."""

import sys

from disentmetrics.cli import main

GRID = ",".join(str(i / 10) for i in range(11))

if __name__ == "__main__":
    out = sys.argv[1] if len(sys.argv) > 1 else "sweep.csv"
    code = main(["sweep", "--eps", GRID, "--eps1", GRID, "--out", out])
    if code == 0:
        print(f"wrote {out}")
    sys.exit(code)

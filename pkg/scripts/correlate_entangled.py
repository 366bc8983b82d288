#!/usr/bin/env python3
"""Evaluate DCI/SAP/MIG/3CharM on 50 representations spanning the
entanglement knob and write their Spearman correlation matrix."""

import sys

from disentmetrics.cli import main

if __name__ == "__main__":
    out = sys.argv[1] if len(sys.argv) > 1 else "correlation.csv"
    code = main(["correlate", "--family", "entangled", "--count", "50", "--n", "2000",
                 "--out", out])
    if code == 0:
        print(f"wrote {out} and {out}.population.json")
    sys.exit(code)

#!/usr/bin/env python3
"""Run every pinned reproduction case and print the scoreboard.

Exit status is nonzero if any row fails; sap-duplicate is a documented
failure (its published target is inconsistent with the construction).
"""

import sys

from disentmetrics.cli import main

if __name__ == "__main__":
    sys.exit(main(["reproduce", "all"]))

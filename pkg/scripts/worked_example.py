#!/usr/bin/env python3
"""Walk the built-in 3x3 transfer market through all three stages, printing
every milestone (deferred acceptance, the auction trace, the equilibrium
reduction) and diffing against the stored expected values."""

import sys

from matchgames.cli import run_example

if __name__ == "__main__":
    sys.exit(0 if run_example() else 1)

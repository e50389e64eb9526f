#!/usr/bin/env python3
"""Run every named experiment with its default configuration.

Artifacts land in out/<experiment>/; exit status is nonzero if any
experiment's asserted invariant fails.
"""

import sys

from geomlab.cli import EXPERIMENTS, load_config, run


def main() -> int:
    worst = 0
    for name in EXPERIMENTS:
        if name == "verify-all":
            continue  # covered by scripts/verify_all.py and the test suite
        cfg = load_config(name, None, f"out/{name}", seed=None, verify=False)
        worst = max(worst, run(cfg))
    return worst


if __name__ == "__main__":
    sys.exit(main())

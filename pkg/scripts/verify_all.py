#!/usr/bin/env python3
"""Run the acceptance suite and print one pass/fail line per criterion."""

import sys

from geomlab.acceptance import run_all


def main() -> int:
    results = run_all(verbose=True)
    failed = [r for r in results if not r.passed]
    print(f"\n{len(results) - len(failed)}/{len(results)} criteria passed")
    return 1 if failed else 0


if __name__ == "__main__":
    sys.exit(main())

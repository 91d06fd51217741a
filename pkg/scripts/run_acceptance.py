#!/usr/bin/env python3
"""Run the acceptance gate and show the per-criterion PASS/FAIL lines.

Two letter-set assertions are expected to fail; see README.md for the
semantic reason.  Everything else should pass on a stock checkout.
"""

import argparse
import pathlib
import subprocess
import sys


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("-k", default=None, help="pytest -k expression")
    parser.add_argument("--failfast", action="store_true", help="stop at the first failure")
    args = parser.parse_args()

    gate = pathlib.Path(__file__).resolve().parent.parent / "tests" / "test_acceptance.py"
    cmd = [sys.executable, "-m", "pytest", str(gate), "-q", "-s"]
    if args.k:
        cmd += ["-k", args.k]
    if args.failfast:
        cmd.append("-x")
    return subprocess.call(cmd)


if __name__ == "__main__":
    sys.exit(main())

#!/usr/bin/env python3
"""Run every sweep in configs/ (or the ones named) and write their CSVs."""

import argparse
import sys
import time
from pathlib import Path

from fran_idnc.cli import main

ROOT = Path(__file__).resolve().parent.parent


def run(names, iterations=None):
    paths = [ROOT / "configs" / f"{n}.yaml" for n in names] if names else \
        sorted((ROOT / "configs").glob("sweep_*.yaml"))
    worst = 0
    for p in paths:
        t0 = time.time()
        argv = ["run", "--config", str(p)]
        if iterations:
            argv += ["--iterations", str(iterations)]
        print(f"== {p.stem}")
        code = main(argv)
        print(f"   {time.time() - t0:.0f}s, exit {code}")
        worst = max(worst, code)
    return worst


if __name__ == "__main__":
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("names", nargs="*", help="config stems, e.g. sweep_users")
    ap.add_argument("--iterations", type=int, help="override the configured count")
    args = ap.parse_args()
    sys.exit(run(args.names, args.iterations))

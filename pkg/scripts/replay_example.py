#!/usr/bin/env python3
"""Replay the bundled six-user example under every scheme, with the slot
trace for the joint scheduler and the exhaustive optimum for reference."""

import sys
from pathlib import Path

from fran_idnc.cli import replay
from fran_idnc.scenario import bundled, load_fixed
from fran_idnc.schedulers import SCHEMES
from fran_idnc.sim import run_episode

sys.path.insert(0, str(Path(__file__).resolve().parent.parent / "tests"))
from oracles import optimal_completion_time  # noqa: E402


def main():
    replay(None, "joint")
    sc = load_fixed(bundled("example1.yaml"))
    print()
    for scheme in SCHEMES:
        r = run_episode(sc.instance, sc.side, scheme, seed=0)
        print(f"{scheme:24s} T_o={r.total_time:g} s  slots={r.num_slots}")
    print(f"{'exhaustive optimum':24s} T_o={optimal_completion_time(sc.instance, sc.side):g} s")


if __name__ == "__main__":
    main()

#!/usr/bin/env python3
"""Benchmark sweep: iteration counts vs theoretical caps for every class.

Writes a tab-separated table to stdout; pass --seeds to change the sample
size per (class, epsilon) cell.
"""

import argparse

from matchgames.cli import cmd_bench
from matchgames.core import GAME_CLASSES


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--seeds", type=int, default=20)
    ap.add_argument("--men", type=int, default=4)
    ap.add_argument("--women", type=int, default=4)
    args = ap.parse_args()
    for cls in GAME_CLASSES:
        ns = argparse.Namespace(
            game_class=cls, eps_list="1,0.25", seeds=args.seeds,
            men=args.men, women=args.women,
            actions=2 if cls == "repeated" else 3,
        )
        cmd_bench(ns)


if __name__ == "__main__":
    main()

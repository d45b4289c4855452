#!/usr/bin/env python3
"""Sample teleportation success rates across channel strengths and print a
small text table comparing them with the analytic rate 4*alpha^2.

Usage: python scripts/sweep_alpha.py [--trials N] [--steps K] [--seed S] [--csv FILE]
"""

import argparse
import sys

from teleportnet.cli import main as cli_main


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--trials", type=int, default=2000)
    parser.add_argument("--steps", type=int, default=10)
    parser.add_argument("--alpha-min", type=float, default=0.05)
    parser.add_argument("--alpha-max", type=float, default=0.5)
    parser.add_argument("--seed", type=int, default=42)
    parser.add_argument("--csv", help="also write the table as CSV")
    args = parser.parse_args()

    argv = [
        "sweep",
        "--trials", str(args.trials),
        "--alpha-steps", str(args.steps),
        "--alpha-min", str(args.alpha_min),
        "--alpha-max", str(args.alpha_max),
        "--seed", str(args.seed),
    ]
    if args.csv:
        argv += ["--format", "csv", "--out", args.csv]
    return cli_main(argv)


if __name__ == "__main__":
    sys.exit(main())

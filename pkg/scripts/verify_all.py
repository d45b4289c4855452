#!/usr/bin/env python3
"""Run every verification subcommand in sequence and report the worst exit code.

Usage: python scripts/verify_all.py [--config CFG] [--seed N] [--out-dir DIR]
"""

import argparse
import sys
from pathlib import Path

from teleportnet.cli import main as cli_main

COMMANDS = ("verify-u0", "verify-eq36", "verify-barenco", "verify-outcomes")


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--config")
    parser.add_argument("--seed", type=int)
    parser.add_argument("--out-dir", help="write one JSON report per command here")
    parser.add_argument("--strict-eq36", action="store_true")
    args = parser.parse_args()

    worst = 0
    for command in COMMANDS:
        argv = [command]
        if args.config:
            argv += ["--config", args.config]
        if args.seed is not None:
            argv += ["--seed", str(args.seed)]
        if args.out_dir:
            out = Path(args.out_dir)
            out.mkdir(parents=True, exist_ok=True)
            argv += ["--out", str(out / f"{command}.json")]
        if command == "verify-eq36" and args.strict_eq36:
            argv.append("--strict-eq36")
        print(f"== {command} ==")
        worst = max(worst, cli_main(argv))
    print(f"\noverall: {'ok' if worst == 0 else 'FAILED'}")
    return worst


if __name__ == "__main__":
    sys.exit(main())

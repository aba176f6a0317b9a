"""Command-line entry points.

    plots density --dump episodes.csv --out wealth.png
    plots table --csv results.csv --table rn --out table_rn.md
"""

from __future__ import annotations

import argparse
import sys

from .frames import TABLE_IDS


def main(argv: list[str] | None = None) -> int:
    parser = argparse.ArgumentParser(prog="plots", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("density", help="terminal-wealth KDE curves from an episode dump")
    p.add_argument("--dump", required=True, help="per-episode dump CSV")
    p.add_argument("--out", required=True, help="output PNG path")
    p.add_argument("--group-by", default="adversary")

    p = sub.add_parser("table", help="markdown results table from an evaluation CSV")
    p.add_argument("--csv", required=True, help="results CSV")
    p.add_argument("--table", required=True, choices=list(TABLE_IDS))
    p.add_argument("--out", required=True, help="output markdown path")

    args = parser.parse_args(argv)
    if args.command == "density":
        from .density import render_density

        path = render_density(args.dump, args.out, group_by=args.group_by)
    else:
        from .mdtables import render_table

        path = render_table(args.csv, args.table, args.out)
    print(path)
    return 0


if __name__ == "__main__":
    sys.exit(main())

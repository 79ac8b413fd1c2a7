"""plots <kind> <csv...> -o <img>"""

from __future__ import annotations

import argparse
import sys
from collections.abc import Sequence

from .readers import SchemaMismatch
from .render import KINDS, FigureSpec, render


def main(argv: Sequence[str] | None = None) -> int:
    parser = argparse.ArgumentParser(
        prog="plots",
        description="Render dualband experiment CSVs into figure images.",
    )
    parser.add_argument("kind", choices=KINDS)
    parser.add_argument("csv", nargs="+", help="input CSV file(s)")
    parser.add_argument("-o", "--out", required=True, metavar="IMG",
                        help="output image path (png)")
    args = parser.parse_args(argv)
    try:
        result = render(FigureSpec(args.kind, tuple(args.csv), args.out))
    except SchemaMismatch as exc:
        print(f"schema error: {exc}", file=sys.stderr)
        return 1
    print(f"wrote {result.out}")
    return 0


if __name__ == "__main__":
    sys.exit(main())

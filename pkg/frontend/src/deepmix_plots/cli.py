"""CLI: deepmix-plot --kind <fig1b|dynamics|selfdual> --in <csv> --out <img>."""

from __future__ import annotations

import argparse
import sys

from .render import SCHEMAS, PlotSpec, SchemaError, render


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="deepmix-plot",
        description="Render a static figure from a deepmix result CSV.",
    )
    parser.add_argument("--kind", required=True, choices=sorted(SCHEMAS))
    parser.add_argument("--in", dest="csv_path", required=True, help="input CSV")
    parser.add_argument("--out", dest="out_path", required=True, help="output image")
    parser.add_argument(
        "--logy",
        choices=["on", "off"],
        default=None,
        help="force linear or log y axis (default depends on kind)",
    )
    parser.add_argument("--title", default=None)
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    logy = None if args.logy is None else args.logy == "on"
    try:
        out = render(
            PlotSpec(args.kind, args.csv_path, args.out_path, logy, args.title)
        )
    except SchemaError as exc:
        print(f"schema error: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"i/o error: {exc}", file=sys.stderr)
        return 1
    print(f"wrote {out}")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())

"""irs-plot: render irs-opsim result CSVs to PNG figures."""

from __future__ import annotations

import argparse
import sys

from .render import PlotSpec, SchemaError, render


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="irs-plot",
                                description="Render irs-opsim CSVs to figures")
    p.add_argument("csv", nargs="+", help="result CSV file(s)")
    p.add_argument("--series", action="append",
                   help="comparator to plot (repeatable; default: all)")
    p.add_argument("--x-axis", help="x axis label (default: from manifest)")
    p.add_argument("--scale", choices=["linear", "log-x"],
                   help="x scale (default: log-x for K sweeps)")
    p.add_argument("--out", help="output image (single CSV) or directory")
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        for path in args.csv:
            if args.out and len(args.csv) == 1 and args.out.endswith(".png"):
                out = args.out
            else:
                base = path.rsplit(".", 1)[0].rsplit("/", 1)[-1] + ".png"
                out = f"{args.out.rstrip('/')}/{base}" if args.out else \
                    path.rsplit(".", 1)[0] + ".png"
            image = render(PlotSpec(csv_path=path, output=out,
                                    x_axis=args.x_axis,
                                    series=args.series or [],
                                    scale=args.scale))
            print(f"wrote {image}")
    except (SchemaError, FileNotFoundError) as e:
        print(f"error: {e}", file=sys.stderr)
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())

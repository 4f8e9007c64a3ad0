"""Command-line front end.

Subcommands:
  run <config>                 execute a study described by a config file
  plot <kind> <csv...> -o F    render metrics CSVs to an SVG chart
  oracle-min                   brute-force the benchmark's global minimum
  verify                       run the embedded property suites

Exit codes: 0 success, 2 configuration problem, 3 data-file problem,
1 anything else.
"""

from __future__ import annotations

import argparse
import sys

from .errors import ConfigError, DataError

EXIT_OK = 0
EXIT_INTERNAL = 1
EXIT_CONFIG = 2
EXIT_DATA = 3


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="gradfilt",
        description="Gradient-filtering optimization experiments",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="run a configured study")
    p_run.add_argument("config", help="path to an experiment config file")

    p_plot = sub.add_parser("plot", help="render metrics CSVs to SVG")
    p_plot.add_argument(
        "kind", choices=("value_curve", "variance_curve", "trajectory2d")
    )
    p_plot.add_argument("csvs", nargs="+", help="metrics CSV files")
    p_plot.add_argument("-o", "--output", required=True, help="SVG path")

    p_oracle = sub.add_parser(
        "oracle-min", help="print the benchmark's global minimum"
    )
    p_oracle.add_argument(
        "--resolution", type=int, default=1201,
        help="grid points per axis (default 1201)",
    )

    sub.add_parser("verify", help="run the embedded property suites")
    return parser


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        if args.command == "run":
            from .harness import parse_config, run_study

            spec = parse_config(args.config)
            written = run_study(spec)
            for path in written:
                print(path)
        elif args.command == "plot":
            from .plots import emit_svg_plot

            emit_svg_plot(args.csvs, args.kind, args.output)
            print(args.output)
        elif args.command == "oracle-min":
            from .problems import grid_minimum

            point, value = grid_minimum(resolution=args.resolution)
            print(f"f* = {float(value)!r}")
            print(f"argmin = ({float(point[0])!r}, {float(point[1])!r})")
        elif args.command == "verify":
            from .verify import run_all

            failures = run_all()
            return EXIT_OK if failures == 0 else EXIT_INTERNAL
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except DataError as exc:
        print(f"data error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except OSError as exc:
        print(f"i/o error: {exc}", file=sys.stderr)
        return EXIT_DATA
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())

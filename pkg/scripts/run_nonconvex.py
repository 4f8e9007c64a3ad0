#!/usr/bin/env python3
"""Run the 2D benchmark sweep and render its charts.

Executes configs/nonconvex.cfg (or a config given on the command line),
then emits a loss curve, a squared-filtered-gradient curve, and a 2D
trajectory plot per learning rate, next to the metrics CSVs.
"""

import argparse
import os
import sys

from gradfilt.harness import parse_config, run_study
from gradfilt.plots import emit_svg_plot

DEFAULT_CONFIG = os.path.join(
    os.path.dirname(os.path.dirname(os.path.abspath(__file__))),
    "configs", "nonconvex.cfg",
)


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("config", nargs="?", default=DEFAULT_CONFIG)
    args = parser.parse_args(argv)

    spec = parse_config(args.config)
    written = run_study(spec)
    cells = [p for p in written if not p.endswith("summary.csv")]
    for path in written:
        print(path)

    for lr in spec.lrs:
        tag = "lr" + format(lr, "g").replace(".", "p")
        group = [p for p in cells if p.endswith(f"_{tag}.csv")]
        if not group:
            continue
        for kind, stem in (
            ("value_curve", "loss"),
            ("variance_curve", "grad_sq"),
            ("trajectory2d", "trajectory"),
        ):
            out = os.path.join(spec.output_dir, f"{stem}_{tag}.svg")
            emit_svg_plot(group, kind, out)
            print(out)
    return 0


if __name__ == "__main__":
    sys.exit(main())

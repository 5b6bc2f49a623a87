"""``lab`` command line: run an experiment from a JSON config into a CSV.

Usage::

    lab <experiment> --config cfg.json --out table.csv [--seed N] [--threads N]

Experiments: klembeck, gap, rescale, normalize, squeeze-sweep,
bounded-geometry.  Exit codes: 0 success, 2 precondition failure,
3 numerical-quality failure.
"""

from __future__ import annotations

import argparse
import json
import sys

from .experiments import (EXPERIMENTS, PreconditionError, QualityError,
                          run_experiment)

_COLUMN_HELP = """experiment columns:
  klembeck          t, deviation, pinch
  gap               t, squeeze_lower, squeeze_upper, pinch, deviation,
                    ball_pinch, ball_lower, ball_upper, claim
  rescale           n, delta, R, distance, uncertainty
  normalize         index, family, scale_min, scale_max, passed,
                    disc_margin, plane_margin, orth_error
  squeeze-sweep     t, lower, upper
  bounded-geometry  points, C0, cond3, cond4, cond5, M

config keys (JSON): domain descriptor (see convexlab.domains), xi as
[[re, im], ...], t_values or deltas, radii, kernel {N | caps | backend},
seed.  The CSV body is byte-identical for a fixed config and seed.
"""


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="lab",
        description="numerical experiments on the complex geometry of convex domains",
        epilog=_COLUMN_HELP,
        formatter_class=argparse.RawDescriptionHelpFormatter,
    )
    parser.add_argument("experiment", choices=sorted(EXPERIMENTS))
    parser.add_argument("--config", required=True, help="path to the JSON config")
    parser.add_argument("--out", required=True, help="output CSV path")
    parser.add_argument("--seed", type=int, default=None,
                        help="override the config seed (default 0)")
    parser.add_argument("--threads", type=int, default=1,
                        help="worker threads for sweep points")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    with open(args.config) as fh:
        config = json.load(fh)
    seed = args.seed if args.seed is not None else int(config.get("seed", 0))
    try:
        table = run_experiment(args.experiment, config, seed=seed,
                               threads=args.threads)
    except PreconditionError as exc:
        print(f"precondition failure: {exc}", file=sys.stderr)
        return 2
    except QualityError as exc:
        table = getattr(exc, "table", None)
        if table is not None:
            with open(args.out, "w") as fh:
                fh.write(table.to_csv())
        print(f"numerical-quality failure: {exc}", file=sys.stderr)
        return 3
    with open(args.out, "w") as fh:
        fh.write(table.to_csv())
    return 0


if __name__ == "__main__":
    sys.exit(main())

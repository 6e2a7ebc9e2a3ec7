"""Command-line front end: one subcommand per experiment kind.

    critfield verify-diffeo --config cfg.txt --out results/ [--seed S]
        [--replicates R] [--threads N] [--mode shared|independent]

Exit codes: 0 experiment PASS, 1 FAIL, 2 configuration error.
Flag overrides are folded into the config before hashing, so report
provenance always reflects the effective configuration.
"""

import argparse
import sys

from .config import ConfigError, ExperimentConfig
from .experiments import RUNNERS
from .reporting import write_report


def build_parser():
    parser = argparse.ArgumentParser(
        prog="critfield",
        description="Critical points of Gaussian random fields: verification experiments",
    )
    sub = parser.add_subparsers(dest="kind", required=True)
    for kind in RUNNERS:
        p = sub.add_parser(kind, help=f"run the {kind} experiment")
        p.add_argument("--config", required=True, help="experiment config file")
        p.add_argument("--seed", type=int, default=None, help="override master seed")
        p.add_argument("--replicates", type=int, default=None, help="override replicate count")
        p.add_argument("--out", default=None, help="output directory (overrides config)")
        p.add_argument("--threads", type=int, default=1, help="worker threads over replicates")
        p.add_argument("--mode", choices=["shared", "independent"], default=None,
                       help="shared randomness or independent realizations")
        p.add_argument("--quiet", action="store_true", help="suppress the check listing")
    return parser


def _effective_config(args):
    config = ExperimentConfig.from_file(args.config)
    kind_in_file = config.get_str("experiment", "kind", args.kind)
    if kind_in_file != args.kind:
        raise ConfigError(
            f"config is for kind {kind_in_file!r} but subcommand is {args.kind!r}")
    config.set("experiment", "kind", args.kind)
    if args.seed is not None:
        config.set("experiment", "seed", args.seed)
    if args.replicates is not None:
        if args.replicates < 1:
            raise ConfigError("--replicates must be >= 1")
        config.set("experiment", "replicates", args.replicates)
    if args.mode is not None:
        config.set("experiment", "mode", args.mode)
    if args.out is not None:
        config.set("experiment", "out", args.out)
    return config


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        config = _effective_config(args)
        out_dir = config.get_str("experiment", "out", None)
        if out_dir is None:
            raise ConfigError("no output directory: set [experiment] out or pass --out")
        runner = RUNNERS[args.kind]
        report = runner(config, threads=max(1, args.threads))
    except ConfigError as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return 2

    files = write_report(report, out_dir)
    if not args.quiet:
        for line in report.summary_lines():
            print(line)
        for path in files:
            print(f"wrote {path}")
    else:
        print(f"{report.kind}: {report.verdict}")
    return 0 if report.passed else 1


if __name__ == "__main__":
    sys.exit(main())

"""Command line entry point: ``bandlab <subcommand> --config PATH``."""
from __future__ import annotations

import argparse
import logging
import sys

from ..errors import BandLabError
from .config import load_config
from .runners import RUNNERS

log = logging.getLogger("bandlab")


def build_parser():
    p = argparse.ArgumentParser(prog="bandlab", description="Random band matrix experiments.")
    p.add_argument("command", choices=sorted(RUNNERS))
    p.add_argument("--config", required=True, help="JSON experiment configuration")
    p.add_argument("--out", help="output directory (overrides outputs.directory)")
    p.add_argument("--seed", type=int, help="base seed, unsigned 64-bit")
    p.add_argument("--threads", type=int, help="worker threads for per-sample work")
    p.add_argument("--override", action="append", default=[], metavar="KEY=VALUE",
                   help="set a dotted config field, value parsed as JSON when possible")
    p.add_argument("-v", "--verbose", action="store_true")
    return p


def main(argv=None):
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(message)s")
    try:
        cfg = load_config(args.config, args.override, seed=args.seed, threads=args.threads)
        out = args.out or cfg.outputs.directory
        files = RUNNERS[args.command](cfg, out)
    except (BandLabError, OSError) as exc:
        print(f"bandlab: error: {exc}", file=sys.stderr)
        return 2
    for f in files:
        print(f)
    return 0


if __name__ == "__main__":
    sys.exit(main())

"""``bench`` command line entry point."""
import argparse
import logging
import sys

from ..exceptions import InvalidInputError, NumericError
from .config import load_config
from .runner import check_bounds, check_output_dir, leverage_tables, run_experiment
from .tables import FORMATS, emit_tables, write_bounds, write_profiles

log = logging.getLogger("sketchls.bench")


def _parser():
    ap = argparse.ArgumentParser(prog="bench", description="Sketched least-squares benchmarks.")
    ap.add_argument("-v", "--verbose", action="store_true")
    sub = ap.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="run the configured grid and write result tables")
    run.add_argument("--config", required=True)
    run.add_argument("--out", help="output directory (overrides output_dir)")
    run.add_argument("--threads", type=int, default=1)
    run.add_argument("--mode", choices=("closed", "mc"))
    run.add_argument("--format", choices=FORMATS, default="csv")

    lev = sub.add_parser("leverage", help="write sorted leverage profiles only")
    lev.add_argument("--config", required=True)
    lev.add_argument("--out")

    bounds = sub.add_parser("check-bounds", help="satisfaction rates of the sketch bounds")
    bounds.add_argument("--config", required=True)
    bounds.add_argument("--out")
    bounds.add_argument("--threads", type=int, default=1)
    return ap


def main(argv=None):
    args = _parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING)
    try:
        config = load_config(args.config)
        out = args.out or config.output_dir
        check_output_dir(out)
        if args.command == "run":
            if args.threads < 1:
                raise InvalidInputError("--threads must be >= 1")
            mc = None if args.mode is None else args.mode == "mc"
            table = run_experiment(config, threads=args.threads, mc_mode=mc, output_dir=out)
            paths = emit_tables(table, out, args.format)
        elif args.command == "leverage":
            paths = write_profiles(leverage_tables(config), out)
        else:
            paths = [write_bounds(check_bounds(config, threads=args.threads), out)]
    except (InvalidInputError, NumericError, OSError) as exc:
        print(f"bench: error: {exc}", file=sys.stderr)
        return 2
    for p in paths:
        log.info("wrote %s", p)
    return 0


if __name__ == "__main__":
    sys.exit(main())

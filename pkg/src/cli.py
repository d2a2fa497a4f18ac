"""
Command-line interface: sweep, bitdepth, compare, halftone, selftest, plot, benchmark
"""
import argparse
import logging
import sys
from pathlib import Path
from typing import List, Optional

from config.settings import EXPERIMENT_CONFIG
from .simulation.experiments import (
    EXPERIMENTS, ExperimentRunner, benchmark_engines, build_config, parse_int_list, selftest,
)
from .simulation.outputs import plot_table, save_result, write_table
from .utils.exceptions import GraphQuantizationError
from .utils.logging_utils import setup_logging

logger = logging.getLogger(__name__)

EXIT_FAILURE = 1
EXIT_USAGE = 2

EXPERIMENT_HELP = {
    "sweep": "relative error of SSNS over bandwidths and bit budgets",
    "bitdepth": "mean error against the 2^-B reference as the bit depth grows",
    "compare": "SSNS against SSS-R (sketch) and the bound curves at a fixed bit budget",
    "halftone": "1-bit halftoning of a point cloud's z-coordinate (MSQ, SDW, SSNS)",
}


def _add_logging_flags(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("-v", "--verbose", action="store_true", help="debug logging")
    parser.add_argument("--quiet", action="store_true", help="warnings and errors only")
    parser.add_argument("--log-file", type=Path, help="also write the log to this file")


def _add_experiment_flags(parser: argparse.ArgumentParser) -> None:
    # Defaults are None so that config-file values survive unless a flag is given
    parser.add_argument("--config", type=Path, help="flat 'key: value' file mirroring these flags")
    parser.add_argument("--graph", help="comma list of ring, grid, sensor, swissroll, edgelist, mesh")
    parser.add_argument("--n", type=int, help="vertex count")
    parser.add_argument("--k", type=int, help="nearest neighbours for point-based graphs")
    parser.add_argument("--r", help="bandwidths, e.g. 15,25 or 15:155:10")
    parser.add_argument("--bits", help="bit depths, e.g. 1,2,4 or 1:8")
    parser.add_argument("--trials", type=int, help="signal realizations per configuration")
    parser.add_argument("--seed", type=int, help="master seed")
    parser.add_argument("--engine", choices=["reference", "fast"], help="preprocessing engine")
    parser.add_argument("--out", type=Path, help="output directory")
    parser.add_argument("--path", type=Path, help="edge list, point cloud or ASCII PLY file")
    parser.add_argument("--grid-shape", dest="grid_shape", help="grid dimensions HxW")
    parser.add_argument("--timing", action="store_true", default=None,
                        help="add runtime_ms columns (output is then no longer byte-reproducible)")
    parser.add_argument("--workers", type=int, help="threads used for independent trials")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="graphquant",
        description="Graph signal quantization with single-shot noise shaping",
    )
    subparsers = parser.add_subparsers(dest="command", required=True)

    for name in EXPERIMENTS:
        sub = subparsers.add_parser(name, help=EXPERIMENT_HELP[name])
        _add_experiment_flags(sub)
        _add_logging_flags(sub)

    sub = subparsers.add_parser("selftest", help="reduced contract suite, prints PASS/FAIL per check")
    sub.add_argument("--n", type=int, default=EXPERIMENT_CONFIG["selftest"]["n"])
    sub.add_argument("--seed", type=int, default=EXPERIMENT_CONFIG["seed"])
    _add_logging_flags(sub)

    sub = subparsers.add_parser("plot", help="render a result CSV as an SVG line chart")
    sub.add_argument("csv", type=Path, help="result or summary CSV")
    sub.add_argument("--out", type=Path, help="SVG path (default: next to the CSV)")
    sub.add_argument("--x", help="x column (default r, else bits)")
    sub.add_argument("--y", help="y column (default mean_rel_error)")
    sub.add_argument("--group", help="comma list of grouping columns")
    sub.add_argument("--linear", action="store_true", help="linear y axis")
    _add_logging_flags(sub)

    sub = subparsers.add_parser("benchmark", help="median wall time of both preprocessing engines")
    sub.add_argument("--n", type=int, default=EXPERIMENT_CONFIG["benchmark"]["n"])
    sub.add_argument("--r", default=",".join(str(r) for r in EXPERIMENT_CONFIG["benchmark"]["bandwidths"]))
    sub.add_argument("--repeats", type=int, default=EXPERIMENT_CONFIG["benchmark"]["repeats"])
    sub.add_argument("--seed", type=int, default=EXPERIMENT_CONFIG["seed"])
    sub.add_argument("--out", type=Path, help="CSV path for the timings")
    _add_logging_flags(sub)
    return parser


def _configure_logging(args: argparse.Namespace) -> None:
    level = "DEBUG" if args.verbose else "WARNING" if args.quiet else "INFO"
    setup_logging(level, log_file=args.log_file)


def _run_experiment(args: argparse.Namespace) -> int:
    overrides = {
        "graph": args.graph, "n": args.n, "k": args.k, "r": args.r, "bits": args.bits,
        "trials": args.trials, "seed": args.seed, "engine": args.engine, "out": args.out,
        "path": args.path, "grid_shape": args.grid_shape, "timing": args.timing, "workers": args.workers,
    }
    config = build_config(args.command, args.config, overrides)
    logger.info(f"Starting {config.experiment}: graphs={config.graphs}, r={config.bandwidths}, "
                f"bits={config.bits or 'budget'}, trials={config.trials}, seed={config.seed}")

    result = ExperimentRunner(config, progress=not args.quiet).run()
    save_result(result, config)
    logger.info(f"Finished {config.experiment}: {len(result.rows)} rows written to {config.out}")
    print(result.summary.to_string(index=False))
    return 0


def _run_selftest(args: argparse.Namespace) -> int:
    checks = selftest(n=args.n, seed=args.seed)
    for check in checks:
        print(f"{'PASS' if check.passed else 'FAIL'}  {check.name}  ({check.detail})")
    failed = sum(not check.passed for check in checks)
    print(f"{len(checks) - failed}/{len(checks)} checks passed")
    return EXIT_FAILURE if failed else 0


def _run_plot(args: argparse.Namespace) -> int:
    group = [c.strip() for c in args.group.split(",") if c.strip()] if args.group else None
    out = args.out or args.csv.with_suffix(".svg")
    plot_table(args.csv, out, x=args.x, y=args.y, group_by=group, log_y=not args.linear)
    return 0


def _run_benchmark(args: argparse.Namespace) -> int:
    timings = benchmark_engines(args.n, parse_int_list(args.r, "r"), args.repeats, args.seed)
    print(timings.to_string(index=False))
    if args.out:
        write_table(timings, args.out)
    return 0


def main(argv: Optional[List[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    _configure_logging(args)

    handlers = {"selftest": _run_selftest, "plot": _run_plot, "benchmark": _run_benchmark}
    handler = handlers.get(args.command, _run_experiment)
    try:
        return handler(args)
    except GraphQuantizationError as e:
        logger.error(str(e))
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())

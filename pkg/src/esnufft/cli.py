"""Command-line entry point.

Two subcommands: ``bench`` runs a sweep and writes a delimited table;
``report`` reads such a table and renders figures next to it.  For
convenience a bare flag list (first argument starting with "-") is treated
as an implicit ``bench``.  The CLI itself is single-threaded; parallelism
lives inside the transform calls via --threads.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from .bench import DISTRIBUTIONS, BenchSpec, run_sweep, write_rows
from .errors import EsnufftError

_DIST_ALIASES = {"rand": "rand-uniform", "disc": "disc-quad", "sph": "sph-quad"}


def _float_list(text: str) -> tuple[float, ...]:
    return tuple(float(v) for v in text.split(","))


def _int_list(text: str) -> tuple[int, ...]:
    return tuple(int(v) for v in text.split(","))


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="esnufft-bench",
        description="Benchmark and accuracy sweeps for the esnufft transforms.")
    sub = parser.add_subparsers(dest="command")

    bench = sub.add_parser("bench", help="run a sweep and emit a table")
    bench.add_argument("--type", type=int, choices=(1, 2, 3), default=1,
                       dest="transform_type", help="transform type")
    bench.add_argument("--dim", type=int, choices=(1, 2, 3), default=1)
    bench.add_argument("--dist", choices=sorted(_DIST_ALIASES) + sorted(DISTRIBUTIONS),
                       default="rand", help="point distribution")
    bench.add_argument("--m", type=int, default=1000, help="requested point count")
    bench.add_argument("--n", type=int, default=1000,
                       help="total modes (types 1,2) or targets (type 3)")
    bench.add_argument("--tol", type=_float_list, default=(1e-6,),
                       help="comma-separated tolerance list")
    bench.add_argument("--threads", type=_int_list, default=(1,),
                       help="comma-separated thread-count list")
    bench.add_argument("--reps", type=int, default=3,
                       help="repetitions per cell; best time is reported")
    bench.add_argument("--seed", type=int, default=0)
    bench.add_argument("--format", choices=("csv", "jsonl"), default="csv")
    bench.add_argument("--out", default=None, help="output path (default stdout)")
    bench.add_argument("--exact-kernel", action="store_true",
                       help="evaluate the kernel by direct exponentials")
    bench.add_argument("--check-bounds", action="store_true",
                       help="reject coordinates outside [-3pi, 3pi)")

    report = sub.add_parser("report", help="render figures from a table")
    report.add_argument("table", help="path to a bench CSV or JSONL file")
    report.add_argument("--outdir", default=None,
                        help="figure directory (default: beside the table)")
    return parser


def main(argv: list[str] | None = None) -> int:
    if argv is None:
        argv = sys.argv[1:]
    if argv and argv[0].startswith("-") and argv[0] not in ("-h", "--help"):
        argv = ["bench"] + list(argv)
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.command == "report":
        from .report import render_report
        try:
            paths = render_report(Path(args.table),
                                  Path(args.outdir) if args.outdir else None)
        except (EsnufftError, OSError) as exc:
            print(f"error: {exc}", file=sys.stderr)
            return 1
        for p in paths:
            print(p)
        return 0
    if args.command != "bench":
        parser.print_help()
        return 0
    try:
        spec = BenchSpec(transform_type=args.transform_type, dim=args.dim,
                         dist=_DIST_ALIASES.get(args.dist, args.dist),
                         m=args.m, n=args.n, tolerances=args.tol,
                         threads=args.threads, reps=args.reps, seed=args.seed,
                         use_exact_kernel=args.exact_kernel,
                         check_bounds=args.check_bounds)
        rows = run_sweep(spec)
    except EsnufftError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    if args.out is None:
        write_rows(rows, sys.stdout, args.format)
    else:
        with open(args.out, "w", encoding="utf-8") as fh:
            write_rows(rows, fh, args.format)
    return 0 if all(r.status == "ok" for r in rows) else 1


if __name__ == "__main__":
    sys.exit(main())

"""Command-line entry point.

Exit status: 0 success, 1 usage error, 2 data error, 3 internal error.
Log verbosity is read from ``CSICUT_LOG_LEVEL`` (default WARNING).
"""

from __future__ import annotations

import argparse
import logging
import os
import sys
from pathlib import Path

from .clustering import ALGORITHMS
from .dataset import ingest_csv
from .diagnostics import SUBGROUPS, cutoff_analysis, write_table5
from .errors import CsiCutError, DataError, ReportIOError
from .pipeline import FIXTURE_KINDS, PipelineConfig, emit_report, generate_fixture, load_groups, run_pipeline

EXIT_OK, EXIT_USAGE, EXIT_DATA, EXIT_INTERNAL = 0, 1, 2, 3

_MODES = {"ab-vs-c": "AB_vs_C", "hc-vs-c": "HC_vs_C"}


class _UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        raise _UsageError(message)


def _int_range(text: str) -> tuple[int, int]:
    try:
        lo, hi = (int(v) for v in text.split(":"))
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected LO:HI, got {text!r}") from None
    if hi < lo:
        raise argparse.ArgumentTypeError(f"empty range {text!r}")
    return lo, hi


def _algorithms(text: str) -> tuple[str, ...]:
    names = tuple(t.strip() for t in text.split(",") if t.strip())
    bad = [n for n in names if n not in ALGORITHMS]
    if bad or not names:
        raise argparse.ArgumentTypeError(f"choose from {','.join(ALGORITHMS)}")
    return names


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="csicut", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    run = sub.add_parser("run", help="run the full clustering and cut-off pipeline")
    src = run.add_mutually_exclusive_group(required=True)
    src.add_argument("--input", type=Path, help="cohort CSV")
    src.add_argument("--synthetic", choices=["table3"], help="generate a synthetic cohort instead")
    run.add_argument("--seed", type=int, default=0)
    run.add_argument("--k", type=int, default=3)
    run.add_argument("--variance-threshold", type=float, default=0.80)
    run.add_argument("--algorithms", type=_algorithms, default=ALGORITHMS,
                     help="comma-separated subset of %s" % ",".join(ALGORITHMS))
    run.add_argument("--eps", type=float, default=15.0, help="DBSCAN radius")
    run.add_argument("--min-pts", type=int, default=15, help="DBSCAN core threshold")
    run.add_argument("--cutoffs", type=_int_range, default=(20, 45), help="LO:HI, inclusive")
    run.add_argument("--mode", choices=sorted(_MODES), default="ab-vs-c")
    run.add_argument("--subgroups", default=",".join(SUBGROUPS))
    run.add_argument("--vas-scale", choices=["0-10", "0-100"], default="0-10")
    run.add_argument("--kmeans-restarts", type=int, default=32)
    run.add_argument("--som-epochs", type=int, default=100)
    run.add_argument("--silhouette-sweep", type=_int_range, default=None, metavar="LO:HI",
                     help="also report mean silhouette for each k in the range")
    run.add_argument("--out", type=Path, required=True)

    fix = sub.add_parser("fixture", help="write a reference fixture")
    fix.add_argument("--kind", choices=FIXTURE_KINDS, required=True)
    fix.add_argument("--seed", type=int, default=0)
    fix.add_argument("--out", type=Path, required=True)

    tab = sub.add_parser("table", help="cut-off tables for a cohort with a given low/high split")
    tab.add_argument("--input", type=Path, required=True)
    tab.add_argument("--groups", type=Path, required=True, help="CSV with id,group (low|high)")
    tab.add_argument("--cutoffs", type=_int_range, default=(20, 45))
    tab.add_argument("--out", type=Path, required=True)
    return parser


def _configure_logging():
    level = os.environ.get("CSICUT_LOG_LEVEL", "WARNING").upper()
    logging.basicConfig(level=getattr(logging, level, logging.WARNING),
                        format="%(levelname)s %(name)s: %(message)s")


def _run(args) -> None:
    subgroups = tuple(s.strip() for s in args.subgroups.split(",") if s.strip())
    config = PipelineConfig(
        input=args.input,
        synthetic=args.synthetic,
        seed=args.seed,
        k=args.k,
        variance_threshold=args.variance_threshold,
        algorithms=args.algorithms,
        eps=args.eps,
        min_pts=args.min_pts,
        cutoffs=args.cutoffs,
        mode=_MODES[args.mode],
        subgroups=subgroups,
        vas_scale=args.vas_scale,
        kmeans_restarts=args.kmeans_restarts,
        som_epochs=args.som_epochs,
        sweep=tuple(range(args.silhouette_sweep[0], args.silhouette_sweep[1] + 1)) if args.silhouette_sweep else (),
        out=args.out,
    )
    try:
        config.validate()
    except DataError as exc:
        raise _UsageError(str(exc)) from exc
    report = run_pipeline(config)
    manifest = emit_report(report, args.out)
    overall = report.cutoffs.get("Overall")
    print(f"chosen algorithm: {report.chosen}")
    if overall is not None:
        print(f"overall cut-off: {overall.cutoff} (clinically useful: {overall.clinically_useful})")
    print(f"wrote {len(manifest)} files to {args.out}")


def _table(args) -> None:
    cohort = ingest_csv(args.input)
    split = load_groups(args.groups)
    lo, hi = args.cutoffs
    results = cutoff_analysis(split, cohort, range(lo, hi + 1))
    try:
        args.out.mkdir(parents=True, exist_ok=True)
        for name, res in results.items():
            write_table5(res.table, args.out / f"table5_{name.lower()}.csv")
    except OSError as exc:
        raise ReportIOError(str(exc)) from exc
    for name, res in results.items():
        print(f"{name}: cut-off {res.cutoff}")


def main(argv=None) -> int:
    _configure_logging()
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except _UsageError as exc:
        print(f"csicut: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    try:
        if args.command == "run":
            _run(args)
        elif args.command == "fixture":
            for path in generate_fixture(args.kind, args.seed, args.out):
                print(path)
        else:
            _table(args)
    except _UsageError as exc:
        print(f"csicut: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (CsiCutError, OSError) as exc:
        print(f"csicut: error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except Exception as exc:  # noqa: BLE001
        logging.getLogger(__name__).exception("internal error")
        print(f"csicut: internal error: {exc}", file=sys.stderr)
        return EXIT_INTERNAL
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())

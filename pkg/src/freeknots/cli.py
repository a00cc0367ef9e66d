"""Command-line interface.

Exit codes: 0 success, 1 input/output error, 2 invalid input or arguments,
3 search stopped by the time limit, 4 verification failed.
"""

from __future__ import annotations

import argparse
import sys

import numpy as np

from .dataset import DataError, load_csv
from .oracle import BudgetExceeded, GridSpec, grid_oracle
from .positions import count_regular, count_superset
from .report import fit_report, mbc_mic, to_json, write_plot_csv
from .search import SearchOptions, run_search

EXIT_OK, EXIT_IO, EXIT_INVALID, EXIT_INCOMPLETE, EXIT_VERIFY_FAILED = 0, 1, 2, 3, 4


class _UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_INVALID, f"{self.prog}: error: {message}\n")


def _positive_int(text):
    v = int(text)
    if v < 1:
        raise argparse.ArgumentTypeError(f"expected a positive integer, got {text}")
    return v


def _positive_float(text):
    v = float(text)
    if not v > 0:
        raise argparse.ArgumentTypeError(f"expected a positive number, got {text}")
    return v


def _search_flags(p):
    p.add_argument("input", help="CSV file with columns x,f")
    p.add_argument("--threads", type=_positive_int, default=1)
    p.add_argument("--time-limit", type=_positive_float, default=None,
                   metavar="SECS")
    p.add_argument("--no-prune", action="store_true",
                   help="disable partial-residual pruning")
    p.add_argument("--no-prioritize", action="store_true",
                   help="search chunks in plain lexicographic order")
    p.add_argument("--plot", metavar="PATH", help="write x,s(x) samples here")
    p.add_argument("--json", metavar="PATH", help="write the report here "
                   "instead of stdout")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="freeknots",
                     description="Best least-squares broken lines with free knots.")
    sub = parser.add_subparsers(dest="command", required=True,
                                parser_class=_Parser)

    p = sub.add_parser("fit", help="fit a broken line with k free knots")
    _search_flags(p)
    p.add_argument("--knots", "-k", type=_positive_int, required=True)

    p = sub.add_parser("mbc", help="two-knot fit of a dilution series; "
                       "reports MBC and MIC")
    _search_flags(p)
    p.add_argument("--kappa0", type=_positive_float, required=True,
                   help="initial concentration")

    p = sub.add_parser("count-vectors",
                       help="count regular and all increasing position vectors")
    p.add_argument("data_points", type=_positive_int)
    p.add_argument("knots", type=_positive_int)

    p = sub.add_parser("verify", help="compare the search with the grid oracle")
    p.add_argument("input")
    p.add_argument("--knots", "-k", type=_positive_int, required=True)
    p.add_argument("--grid", type=_positive_int, default=1)
    p.add_argument("--threads", type=_positive_int, default=1)
    return parser


def _options(args) -> SearchOptions:
    return SearchOptions(threads=args.threads, time_limit=args.time_limit,
                         prioritize=not args.no_prioritize,
                         prune=not args.no_prune)


def _emit(report, args):
    text = to_json(report)
    if args.json:
        with open(args.json, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _fit(args, k, extra=None):
    data = load_csv(args.input)
    if extra is not None:
        extra(data)
    if data.mu < k + 1:
        raise _UsageError(
            f"{len(data)} data points cannot determine {k} free knots "
            f"(need at least {k + 3})")
    result = run_search(data, k, _options(args))
    return data, result


def cmd_fit(args) -> int:
    _, result = _fit(args, args.knots)
    report = fit_report(result)
    _emit(report, args)
    if args.plot and result.best is not None:
        write_plot_csv(args.plot, result.best)
    return EXIT_OK if result.complete else EXIT_INCOMPLETE


def _check_dilution_axis(data):
    if not np.array_equal(data.abscissae, np.arange(len(data), dtype=float)):
        raise _UsageError("a dilution series must have abscissae 0, 1, ..., z")


def cmd_mbc(args) -> int:
    _, result = _fit(args, 2, _check_dilution_axis)
    report = fit_report(result)
    if result.best is not None:
        report["MBC"], report["MIC"] = mbc_mic(result.best.knots, args.kappa0)
    _emit(report, args)
    if args.plot and result.best is not None:
        write_plot_csv(args.plot, result.best)
    return EXIT_OK if result.complete else EXIT_INCOMPLETE


def cmd_count(args) -> int:
    mu = args.data_points - 2
    if mu < args.knots + 1:
        raise _UsageError(f"need at least k+3 = {args.knots + 3} data points")
    report = {"data_points": args.data_points, "knots": args.knots,
              "regular": count_regular(mu, args.knots),
              "superset": count_superset(mu, args.knots)}
    sys.stdout.write(to_json(report))
    return EXIT_OK


def cmd_verify(args) -> int:
    data = load_csv(args.input)
    k = args.knots
    if data.mu < k + 1:
        raise _UsageError(f"need at least k+3 = {k + 3} data points")
    oracle = grid_oracle(data, k, GridSpec(args.grid))
    result = run_search(data, k, SearchOptions(threads=args.threads))
    found = result.best.residual
    ok = found <= oracle + 1e-9
    print(f"search residual: {found:.17g}")
    print(f"oracle residual: {oracle:.17g} (grid {args.grid})")
    print("PASS" if ok else "FAIL")
    return EXIT_OK if ok else EXIT_VERIFY_FAILED


COMMANDS = {"fit": cmd_fit, "mbc": cmd_mbc, "count-vectors": cmd_count,
            "verify": cmd_verify}


def main(argv=None) -> int:
    try:
        args = build_parser().parse_args(argv)
    except SystemExit as exc:
        return exc.code
    try:
        return COMMANDS[args.command](args)
    except (FileNotFoundError, IsADirectoryError, PermissionError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO
    except (DataError, _UsageError, BudgetExceeded, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())

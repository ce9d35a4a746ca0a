"""Command-line interface: ``oddsrecal {adjust,fit,apply,simulate,moments}``.

Data goes to standard output (or ``--out``), diagnostics to standard error.
Exit status is 0 on success and 2 on usage, domain or data errors.
"""

from __future__ import annotations

import argparse
import csv
import io
import math
import sys
import warnings

import numpy as np

from . import __version__
from .cohort import (
    ConvergenceError,
    DegenerateOutcomeError,
    apply_update,
    conditional_or_exact,
    moments,
)
from .core import (
    DomainError,
    NoAdmissibleRootError,
    VARIANCE_MESSAGE,
    CalibrationTask,
    marginal_or,
    taylor_or,
)
from .simulation import DEFAULT_DELTAS, DEFAULT_GRID_SIZE, DEFAULT_P0, columns, figure1_grid, row_values

EXIT_OK = 0
EXIT_ERROR = 2
_EDGE = 1e-15


class DataError(ValueError):
    """Malformed input file."""


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_ERROR, f"{self.prog}: error: {message}\n")


def fmt(value, digits=None):
    """Format a number with 17 significant digits, or ``digits`` if given."""
    if isinstance(value, (int, np.integer)) and not isinstance(value, bool):
        return str(int(value))
    value = float(value)
    if math.isnan(value):
        return "nan"
    return f"{value:.{17 if digits is None else digits}g}"


def read_risk_file(path, require_outcomes=False):
    """Parse a ``risk`` or ``risk,outcome`` CSV file.

    Returns ``(header, rows, risks, outcomes)`` where ``outcomes`` is None for
    a risk-only file. Line numbers in error messages count the header as 1.
    """
    try:
        with open(path, newline="", encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        raise DataError(f"{path}: {exc.strerror or exc}") from exc
    reader = csv.reader(io.StringIO(text))
    try:
        header = [h.strip() for h in next(reader)]
    except StopIteration:
        raise DataError(f"{path}: empty file; expected a 'risk' or 'risk,outcome' header") from None
    if header not in (["risk"], ["risk", "outcome"]):
        raise DataError(f"{path}: header must be 'risk' or 'risk,outcome', got {','.join(header)!r}")
    labeled = len(header) == 2
    if require_outcomes and not labeled:
        raise DataError(f"{path}: an 'outcome' column is required")
    rows, risks, outcomes = [], [], []
    for lineno, row in enumerate(reader, start=2):
        if not row or all(not c.strip() for c in row):
            continue
        if len(row) != len(header):
            raise DataError(f"{path}: line {lineno}: expected {len(header)} fields, got {len(row)}")
        try:
            risk = float(row[0])
        except ValueError:
            raise DataError(f"{path}: line {lineno}: risk {row[0]!r} is not a number") from None
        if not (_EDGE < risk < 1.0 - _EDGE):
            raise DataError(f"{path}: line {lineno}: risk {row[0]!r} must lie strictly between 0 and 1")
        risks.append(risk)
        if labeled:
            cell = row[1].strip()
            if cell not in ("0", "1"):
                raise DataError(f"{path}: line {lineno}: outcome {row[1]!r} must be 0 or 1")
            outcomes.append(int(cell))
        rows.append(row)
    if not risks:
        raise DataError(f"{path}: no data rows")
    return header, rows, np.array(risks), (np.array(outcomes, dtype=float) if labeled else None)


def _open_out(path):
    if path is None or path == "-":
        return sys.stdout, False
    try:
        return open(path, "w", newline="", encoding="utf-8"), True
    except OSError as exc:
        raise DataError(f"{path}: {exc.strerror or exc}") from exc


def _write_rows(out, rows):
    writer = csv.writer(out, lineterminator="\n")
    writer.writerows(rows)


def cmd_adjust(args):
    if args.method in ("taylor", "both") and args.v is None:
        raise DomainError("--v is required for the taylor method")
    if args.v is not None and args.v > args.p0 * (1.0 - args.p0):
        raise DomainError(VARIANCE_MESSAGE)
    rows = [("method", "odds_ratio")]
    if args.method in ("simple", "both"):
        rows.append(("simple", fmt(marginal_or(args.p0, args.p1), args.digits)))
    if args.method in ("taylor", "both"):
        task = CalibrationTask(args.p0, args.p1, args.v)
        rows.append(("taylor", fmt(taylor_or(task), args.digits)))
    _emit(args, rows)


def cmd_fit(args):
    _, _, risks, outcomes = read_risk_file(args.file, require_outcomes=True)
    m = moments(risks, sample=args.sample_variance)
    p1 = float(np.mean(outcomes))
    if p1 in (0.0, 1.0):
        raise DegenerateOutcomeError("outcomes are all 0 or all 1; the intercept estimate diverges")
    exact = conditional_or_exact(risks, outcomes)
    simple = marginal_or(m.mean, p1)
    try:
        taylor = taylor_or(CalibrationTask(m.mean, p1, m.variance))
    except NoAdmissibleRootError as exc:
        print(f"warning: taylor: {exc}", file=sys.stderr)
        taylor = math.nan
    d = args.digits
    rows = [
        ("method", "odds_ratio"),
        ("exact", fmt(exact, d)),
        ("simple", fmt(simple, d)),
        ("taylor", fmt(taylor, d)),
        (),
        ("statistic", "value"),
        ("mean", fmt(m.mean, d)),
        ("variance", fmt(m.variance, d)),
        ("n", fmt(m.n)),
    ]
    _emit(args, rows)


def cmd_apply(args):
    header, rows, risks, _ = read_risk_file(args.file)
    updated = apply_update(risks, args.odds_ratio)
    out_rows = [header + ["updated_risk"]]
    out_rows += [[c.strip() for c in row] + [fmt(u, args.digits)] for row, u in zip(rows, updated)]
    _emit(args, out_rows)


def cmd_moments(args):
    _, _, risks, _ = read_risk_file(args.file)
    m = moments(risks)
    sample_var = fmt(moments(risks, sample=True).variance, args.digits) if m.n > 1 else "NA"
    q1, median, q3 = np.percentile(risks, [25, 50, 75])
    d = args.digits
    rows = [
        ("statistic", "value"),
        ("mean", fmt(m.mean, d)),
        ("variance", fmt(m.variance, d)),
        ("sample_variance", sample_var),
        ("n", fmt(m.n)),
        ("q1", fmt(q1, d)),
        ("median", fmt(median, d)),
        ("q3", fmt(q3, d)),
    ]
    _emit(args, rows)


def cmd_simulate(args):
    if args.grid_size < 1:
        raise DomainError("--grid-size must be at least 1")
    for p0 in args.p0:
        if not 0.0 < p0 < 1.0:
            raise DomainError(f"--p0 {p0!r} must lie strictly between 0 and 1")
    mc_n = args.mc_n if args.mc_check else 0
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always")
        rows = figure1_grid(
            p0_values=args.p0,
            deltas=args.delta,
            grid_size=args.grid_size,
            mc_n=mc_n,
            seed=args.seed,
            workers=args.workers,
        )
    for w in caught:
        print(f"warning: {w.message}", file=sys.stderr)
    if not rows:
        raise DomainError("no valid grid points")
    out = [columns(args.log_bias, bool(mc_n))]
    out += [[fmt(v, args.digits) for v in row_values(r, args.log_bias, bool(mc_n))] for r in rows]
    _emit(args, out)


def _emit(args, rows):
    out, close = _open_out(getattr(args, "out", None))
    try:
        _write_rows(out, rows)
    finally:
        if close:
            out.close()


def _common(parser):
    parser.add_argument("--out", default=None, help="write output to this path instead of stdout")
    parser.add_argument("--digits", type=int, default=None, help="significant digits in output (default 17)")
    parser.add_argument("--seed", type=int, default=0, help="root random seed (default 0)")


def build_parser():
    parser = _Parser(prog="oddsrecal", description="Recalibrate risk predictions by a fixed odds-ratio.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("adjust", help="odds-ratio from summary statistics")
    p.add_argument("--p0", type=float, required=True, help="mean predicted risk")
    p.add_argument("--p1", type=float, required=True, help="target mean risk")
    p.add_argument("--v", type=float, default=None, help="variance of predicted risks")
    p.add_argument("--method", choices=("simple", "taylor", "both"), default="both")
    _common(p)
    p.set_defaults(func=cmd_adjust)

    p = sub.add_parser("fit", help="exact, simple and Taylor odds-ratios from a labeled risk file")
    p.add_argument("file")
    p.add_argument("--sample-variance", action="store_true", help="use the n-1 variance for the Taylor method")
    _common(p)
    p.set_defaults(func=cmd_fit)

    p = sub.add_parser("apply", help="apply an odds-ratio to every risk in a file")
    p.add_argument("file")
    p.add_argument("--or", dest="odds_ratio", type=float, required=True)
    _common(p)
    p.set_defaults(func=cmd_apply)

    p = sub.add_parser("simulate", help="bias of simple and Taylor odds-ratios over beta populations")
    p.add_argument("--p0", type=float, nargs="+", default=list(DEFAULT_P0))
    p.add_argument("--delta", type=float, nargs="+", default=list(DEFAULT_DELTAS))
    p.add_argument("--grid-size", type=int, default=DEFAULT_GRID_SIZE)
    p.add_argument("--mc-check", action="store_true", help="add a Monte Carlo exact odds-ratio column")
    p.add_argument("--mc-n", type=int, default=100_000, help="draws per grid point for --mc-check")
    p.add_argument("--log-bias", action="store_true", help="add log-scale bias columns")
    p.add_argument("--workers", type=int, default=1)
    _common(p)
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("moments", help="mean, variance and quartiles of a risk file")
    p.add_argument("file")
    _common(p)
    p.set_defaults(func=cmd_moments)
    return parser


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        args.func(args)
    except (DomainError, DataError, DegenerateOutcomeError, NoAdmissibleRootError, ConvergenceError) as exc:
        print(f"oddsrecal {args.command}: error: {exc}", file=sys.stderr)
        return EXIT_ERROR
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())

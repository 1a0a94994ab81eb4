"""``rcatest`` command-line front end.

Subcommands::

    rcatest test     data.csv [--column NAME|INDEX] [--preprocess log gls-detrend] ...
    rcatest decide   data.csv [--S 5000] [--diff-pass] ...
    rcatest classify --phi 1 --sigma-b2 0.25
    rcatest simulate --phi 0.5 --T 1000 --seed 7 -o series.csv
    rcatest mc-table table1 --reps 500 --errors t2 --T 1000 --format csv

Exit codes: 0 verdict produced (either way), 2 usage or parameter error,
3 data error (including unreadable input), 4 numeric error.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
from typing import Optional, Sequence

import numpy as np

from . import __version__
from .dgp import RcarParams, TimeSeries, classify, simulate
from .diagnostic import AutoP, DiagnosticConfig, FixedP, Preprocess, preprocess_chain
from .errors import DataError, NumericError, ParameterError, RcaError
from .mc import WORKERS_ENV, ErrorLaw, run_grid, table_preset, TABLE_NAMES
from .rngdist import RngStream
from .rtest import (
    CriticalLaw,
    FixedR,
    GFunction,
    NullOrientation,
    TestConfig,
    decision_bound,
    run_test,
    strong_decide,
)

EXIT_OK, EXIT_USAGE, EXIT_DATA, EXIT_NUMERIC = 0, 2, 3, 4

MISSING_TOKENS = frozenset({"", "na", "nan", "n/a", "null", "none", "."})

# sub-stream tags for the randomisation of each pass
_TEST_TAG = 0
_DIFF_TAG = 1


# ---------------------------------------------------------------- input


def _parse_float(text: str) -> Optional[float]:
    try:
        return float(text)
    except ValueError:
        return None


def _is_missing(text: str) -> bool:
    return text.strip().lower() in MISSING_TOKENS


def _resolve_column(spec, header, width):
    if spec is None:
        return None
    if header is not None and spec in header:
        return header.index(spec)
    try:
        idx = int(spec)
    except ValueError:
        raise ParameterError(f"column {spec!r} not found") from None
    if not 0 <= idx < width:
        raise ParameterError(f"column index {idx} out of range (0..{width - 1})")
    return idx


def read_series(
    source,
    column=None,
    date_column=None,
    drop_missing: bool = False,
    label: Optional[str] = None,
) -> TimeSeries:
    """Read one numeric column of a CSV file (or text stream) into a series.

    The header is detected automatically: the first row is a header when
    none of its cells parses as a number.  Without ``column`` the last
    column other than ``date_column`` whose first data cell is numeric is
    used, so ``t,x`` and ``date,value`` layouts pick the values.  Rows
    keep file order; the date column is never used.
    """
    if isinstance(source, str):
        with open(source, newline="", encoding="utf-8") as fh:
            rows = [r for r in csv.reader(fh) if r]
    else:
        rows = [r for r in csv.reader(source) if r]
    if not rows:
        raise DataError("input contains no rows")
    header = None
    if all(_parse_float(c) is None for c in rows[0]):
        header = [c.strip() for c in rows[0]]
        rows = rows[1:]
    if not rows:
        raise DataError("input contains a header but no data rows")
    width = len(header) if header is not None else len(rows[0])
    date_idx = _resolve_column(date_column, header, width)
    col = _resolve_column(column, header, width)
    if col is None:
        for j in reversed(range(width)):
            if j == date_idx:
                continue
            cell = rows[0][j] if j < len(rows[0]) else ""
            if _parse_float(cell) is not None or _is_missing(cell):
                col = j
                break
        else:
            raise DataError("no numeric column found")
    values = []
    for lineno, row in enumerate(rows, start=2 if header is not None else 1):
        cell = row[col] if col < len(row) else ""
        if _is_missing(cell):
            if drop_missing:
                continue
            raise DataError(f"missing value in row {lineno}; pass --drop-missing to skip such rows")
        val = _parse_float(cell)
        if val is None or not math.isfinite(val):
            raise DataError(f"non-numeric value {cell!r} in row {lineno}")
        values.append(val)
    if not values:
        raise DataError("selected column has no values")
    name = label or (header[col] if header is not None else None)
    return TimeSeries(np.array(values), name)


# ---------------------------------------------------------------- output


def _json_value(v):
    if isinstance(v, float) and not math.isfinite(v):
        return repr(v)  # "inf" / "nan"; float() parses them back
    return v


def _json_line(d: dict) -> str:
    return json.dumps({k: _json_value(v) for k, v in d.items()})


def _csv_block(dicts: Sequence[dict]) -> str:
    buf = io.StringIO()
    writer = csv.DictWriter(buf, fieldnames=list(dicts[0]), lineterminator="\n")
    writer.writeheader()
    for d in dicts:
        writer.writerow({k: repr(v) if isinstance(v, float) else v for k, v in d.items()})
    return buf.getvalue()


def _fmt_lt(l_t: float) -> str:
    return "saturated" if math.isinf(l_t) else f"{l_t:.6g}"


def _emit(fmt: str, dicts: list, text: str, out):
    if fmt == "json-lines":
        for d in dicts:
            out.write(_json_line(d) + "\n")
    elif fmt == "csv":
        out.write(_csv_block(dicts))
    else:
        out.write(text.rstrip("\n") + "\n")


def _table(pairs) -> str:
    width = max(len(k) for k, _ in pairs)
    return "\n".join(f"{k.ljust(width)}  {v}" for k, v in pairs)


# ---------------------------------------------------------------- config


def _test_config(args) -> TestConfig:
    diag = DiagnosticConfig(
        p_rule=FixedP(args.p) if args.p is not None else AutoP(),
        demean_window=not args.no_demean,
    )
    kw = dict(
        beta=args.beta,
        g=GFunction(args.g),
        alpha=args.alpha,
        null=NullOrientation(args.null),
        s_reps=args.S,
        critical_law=CriticalLaw(args.critical),
        diagnostic=diag,
    )
    if args.R is not None:
        kw["r_rule"] = FixedR(args.R)
    return TestConfig(**kw)


def _load(args) -> TimeSeries:
    source = sys.stdin if args.input == "-" else args.input
    try:
        series = read_series(source, args.column, args.date_column, args.drop_missing)
    except OSError as exc:
        raise DataError(f"cannot read {args.input}: {exc.strerror or exc}") from exc
    return preprocess_chain(series, args.preprocess or [], args.cbar)


# ---------------------------------------------------------------- commands


def cmd_test(args, out) -> int:
    cfg = _test_config(args)
    series = _load(args)
    outcome = run_test(series, cfg, RngStream(args.seed).child(_TEST_TAG))
    bound = decision_bound(cfg.alpha, cfg.s_reps) if cfg.s_reps >= 16 else math.nan
    text = _table([
        ("null", outcome.null.value),
        ("T", outcome.T),
        ("p", outcome.p),
        ("v_p", f"{outcome.v_p:.6g}"),
        ("D_T", f"{outcome.d_t:.6f}"),
        ("l_T", _fmt_lt(outcome.l_t)),
        ("R", outcome.R),
        ("Theta", f"{outcome.theta:.6f}"),
        ("critical value", f"{outcome.critical_value:.4f}"),
        ("p-value", f"{outcome.p_value:.4f}"),
        ("reject", "yes" if outcome.reject else "no"),
        (f"strong-rule bound (S={cfg.s_reps})", f"{bound:.4f}"),
    ])
    _emit(args.format, [outcome.to_dict()], text, out)
    return EXIT_OK


def cmd_decide(args, out) -> int:
    cfg = _test_config(args)
    series = _load(args)
    root = RngStream(args.seed)
    passes = [("levels", series, root.child(_TEST_TAG))]
    if args.diff_pass:
        passes.append(("first-difference", preprocess_chain(series, [Preprocess.DIFF]), root.child(_DIFF_TAG)))
    dicts, blocks = [], []
    for name, data, stream in passes:
        rep = strong_decide(data, cfg, stream)
        d = {"pass": name, **rep.to_dict()}
        dicts.append(d)
        blocks.append(_table([
            ("pass", name),
            ("null", rep.null.value),
            ("T", rep.T),
            ("D_T", f"{rep.d_t:.6f}"),
            ("l_T", _fmt_lt(rep.l_t)),
            ("S", rep.s_used),
            (f"Q({rep.alpha:g})", f"{rep.q_alpha:.4f}"),
            (f"bound D({rep.alpha:g},{rep.s_used})", f"{rep.bound:.4f}"),
            ("accept null", "yes" if rep.accept_null else "no"),
            ("decision", rep.decision.value),
        ]))
    _emit(args.format, dicts, "\n\n".join(blocks), out)
    return EXIT_OK


def cmd_classify(args, out) -> int:
    label = classify(args.phi, args.sigma_b2)
    d = {
        "phi": float(args.phi),
        "sigma_b2": float(args.sigma_b2),
        "lyapunov": label.lyapunov,
        "regime": label.regime.value,
        "finite_variance": label.finite_variance,
    }
    _emit(args.format, [d], str(label), out)
    return EXIT_OK


def cmd_simulate(args, out) -> int:
    params = RcarParams.gaussian_rcar(args.phi, args.sigma_b2, ErrorLaw(args.errors).dist(), burn_in=args.burn_in)
    x = simulate(params, args.T, RngStream(args.seed))
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["t", "x"])
    for t, v in enumerate(x.values.tolist(), start=1):
        writer.writerow([t, repr(v)])
    _write(args.output, buf.getvalue(), out)
    return EXIT_OK


def cmd_mc_table(args, out) -> int:
    base = _test_config(args)
    scenarios = table_preset(
        args.preset,
        n_reps=args.reps,
        laws=args.errors,
        sizes=args.T,
        test_cfg=base,
        with_strong_rule=False if args.no_strong else None,
    )
    progress = None
    if args.progress:
        def progress(done, total):
            print(f"\r{done}/{total} chunks", end="" if done < total else "\n", file=sys.stderr)
    report = run_grid(scenarios, args.seed, args.workers, progress)
    text = report.to_csv() if args.format == "csv" else report.to_text() + "\n"
    _write(args.output, text, out)
    return EXIT_OK


def _write(path, text, out):
    if path in (None, "-"):
        out.write(text)
        return
    try:
        with open(path, "w", newline="", encoding="utf-8") as fh:
            fh.write(text)
    except OSError as exc:
        raise DataError(f"cannot write {path}: {exc.strerror or exc}") from exc


# ---------------------------------------------------------------- parser


def _add_test_options(p: argparse.ArgumentParser):
    g = p.add_argument_group("test configuration")
    g.add_argument("--null", choices=[n.value for n in NullOrientation], default="stationary")
    g.add_argument("--alpha", type=float, default=0.05)
    g.add_argument("--S", type=int, default=1000, help="randomisations for the strong rule")
    g.add_argument("--R", type=int, default=None, help="fixed R (default R = T)")
    g.add_argument("--p", type=int, default=None, help="fixed training window (default ceil(2 ln ln T))")
    g.add_argument("--beta", type=float, default=1.25, help="exponent of psi(T) = (ln T)^beta")
    g.add_argument("--g", choices=[v.value for v in GFunction], default="double-exp")
    g.add_argument("--critical", choices=[v.value for v in CriticalLaw], default="chi2")
    g.add_argument("--no-demean", action="store_true", help="do not demean the training window")


def _add_input_options(p: argparse.ArgumentParser):
    p.add_argument("input", help="CSV file, or - for stdin")
    g = p.add_argument_group("input")
    g.add_argument("--column", help="column name or 0-based index (default: last numeric)")
    g.add_argument("--date-column", help="column holding dates (ignored)")
    g.add_argument("--drop-missing", action="store_true", help="skip rows with missing values")
    g.add_argument(
        "--preprocess",
        nargs="+",
        action="extend",
        choices=[m.value for m in Preprocess],
        metavar="STEP",
        help="transforms applied in the given order: " + ", ".join(m.value for m in Preprocess),
    )
    g.add_argument("--cbar", type=float, default=-13.5, help="local-to-unity constant for gls-detrend")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="rcatest", description="Randomised strict-stationarity tests for RCAR data.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("test", help="single randomised test")
    _add_input_options(p)
    _add_test_options(p)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--format", choices=["text", "csv", "json-lines"], default="text")
    p.set_defaults(func=cmd_test)

    p = sub.add_parser("decide", help="strong decision rule over S randomisations")
    _add_input_options(p)
    _add_test_options(p)
    p.add_argument("--diff-pass", action="store_true", help="also decide on the first-differenced series")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--format", choices=["text", "csv", "json-lines"], default="text")
    p.set_defaults(func=cmd_decide)

    p = sub.add_parser("classify", help="regime of a Gaussian-coefficient RCAR(1)")
    p.add_argument("--phi", type=float, required=True)
    p.add_argument("--sigma-b2", type=float, default=0.0)
    p.add_argument("--format", choices=["text", "csv", "json-lines"], default="text")
    p.set_defaults(func=cmd_classify)

    p = sub.add_parser("simulate", help="write a simulated RCAR(1) series as CSV")
    p.add_argument("--phi", type=float, required=True)
    p.add_argument("--sigma-b2", type=float, default=0.0)
    p.add_argument("--errors", choices=[e.value for e in ErrorLaw], default="gaussian")
    p.add_argument("--T", type=int, required=True)
    p.add_argument("--burn-in", type=int, default=1000)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("-o", "--output", default=None, help="output file (default stdout)")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("mc-table", help="Monte Carlo rejection frequencies for a preset grid")
    p.add_argument("preset", choices=TABLE_NAMES)
    p.add_argument("--reps", type=int, default=500)
    p.add_argument("--errors", nargs="+", action="extend", choices=[e.value for e in ErrorLaw])
    p.add_argument("--T", nargs="+", action="extend", type=int)
    p.add_argument("--workers", type=int, default=None, help=f"process count (default ${WORKERS_ENV} or all cores)")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--format", choices=["text", "csv"], default="text")
    p.add_argument("--no-strong", action="store_true", help="skip the strong rule in tables 1 and 2")
    p.add_argument("--progress", action="store_true")
    p.add_argument("-o", "--output", default=None)
    _add_test_options(p)
    p.set_defaults(func=cmd_mc_table)
    return parser


def main(argv: Optional[Sequence[str]] = None, out=None) -> int:
    out = out or sys.stdout
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        return args.func(args, out)
    except RcaError as exc:
        print(f"rcatest: error: {exc}", file=sys.stderr)
        return exit_code(exc)


def exit_code(exc: BaseException) -> int:
    """Stable exit code for a package error."""
    if isinstance(exc, DataError):
        return EXIT_DATA
    if isinstance(exc, NumericError):
        return EXIT_NUMERIC
    return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())

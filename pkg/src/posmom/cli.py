"""
Command-line front end: ``posmom density``, ``posmom verify`` and ``posmom figure``.

Exit codes: 0 success, 1 verification failure, 2 usage error, 3 numerical failure.
"""

from __future__ import annotations

import argparse
import dataclasses
import io
import json
import sys
import time
from pathlib import Path

import numpy as np

from . import __version__
from .core import CLOSED_FORM_M, Backend
from .figures import FIGURES, figure_curves, figure_tables, render_svg
from .quadrature import QuadratureConfig, QuadratureError
from .scan import DensityTable, ScanError, default_range, scan_density
from .specfun import ConvergenceError
from .verification import format_result, run_checks

__all__ = ["main", "build_parser", "write_csv", "read_csv", "manifest"]

EXIT_OK, EXIT_VERIFY, EXIT_USAGE, EXIT_NUMERIC = 0, 1, 2, 3

CSV_COLUMNS = DensityTable.COLUMNS
CSV_FORMAT = "%.12g"


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        raise _UsageError(f"{self.prog}: error: {message}")


class _UsageError(Exception):
    pass


def manifest(command: str, m_values, grid: dict, cfg: QuadratureConfig, backend: str,
             wall_time: float) -> dict:
    return {
        "command": command,
        "m_values": [int(m) for m in m_values],
        "grid": grid,
        "config": dataclasses.asdict(cfg),
        "config_fingerprint": cfg.fingerprint(),
        "backend": backend,
        "version": __version__,
        "wall_time_s": round(wall_time, 3),
    }


def write_csv(stream, columns: dict, names=CSV_COLUMNS) -> None:
    """Header plus rows formatted with 12 significant digits, LF line endings."""
    stream.write(",".join(names) + "\n")
    data = np.column_stack([np.asarray(columns[c], dtype=float) for c in names])
    for row in data:
        stream.write(",".join(CSV_FORMAT % v for v in row) + "\n")


def read_csv(path) -> dict:
    """Parse a CSV written by :func:`write_csv` back into float columns."""
    with open(path, newline="") as fh:
        header = fh.readline().rstrip("\n").split(",")
        rows = [line.rstrip("\n").split(",") for line in fh if line.strip()]
    data = np.array(rows, dtype=float).reshape(-1, len(header))
    return {name: data[:, k] for k, name in enumerate(header)}


def _write_text(path: str | None, text: str) -> None:
    if path is None or path == "-":
        sys.stdout.write(text)
        return
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(text)


def cmd_density(args) -> int:
    backend = Backend(args.backend)
    if backend is Backend.CLOSED_FORM and abs(args.m) not in CLOSED_FORM_M:
        print(f"error: no closed form for m = {args.m} (available: {CLOSED_FORM_M})", file=sys.stderr)
        return EXIT_USAGE
    lo, hi = default_range(args.m)
    lo = lo if args.min is None else args.min
    hi = hi if args.max is None else args.max
    if not args.step > 0 or hi < lo:
        print("error: need step > 0 and min <= max", file=sys.stderr)
        return EXIT_USAGE

    cfg = QuadratureConfig()
    t0 = time.perf_counter()
    try:
        table = scan_density(args.m, lo, hi, args.step, cfg, backend)
    except ScanError as exc:
        print(f"error: numerical failure at lambda = {exc.lam:.12g}: {exc.cause}", file=sys.stderr)
        return EXIT_NUMERIC
    except (QuadratureError, ConvergenceError, FloatingPointError) as exc:
        print(f"error: numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    meta = manifest("density", [args.m],
                    {"min": lo, "max": hi, "step": args.step, "n_points": int(table.lambdas.size)},
                    cfg, backend.value, time.perf_counter() - t0)

    fmt = args.format
    if fmt is None:
        fmt = "json" if args.out and args.out.endswith(".json") else "csv"
    if fmt == "json":
        cols = {k: [float(v) for v in table.columns()[k]] for k in CSV_COLUMNS}
        _write_text(args.out, json.dumps({"manifest": meta, "columns": cols}, indent=1) + "\n")
    else:
        buf = io.StringIO()
        write_csv(buf, table.columns())
        _write_text(args.out, buf.getvalue())
        if args.out and args.out != "-":
            # wall time would break byte-identical CSVs, so the manifest lives beside it
            meta["data_file"] = Path(args.out).name
            _write_text(args.out + ".manifest.json", json.dumps(meta, indent=1) + "\n")
    return EXIT_OK


def _parse_m_set(text: str) -> tuple:
    try:
        return tuple(int(v) for v in text.replace(" ", "").split(",") if v)
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"not a comma-separated integer list: {text!r}") from exc


def cmd_verify(args) -> int:
    from .verification import CHECKS

    if args.criteria is not None and not set(args.criteria) <= set(CHECKS):
        print(f"error: criteria must be drawn from {sorted(CHECKS)}", file=sys.stderr)
        return EXIT_USAGE
    t0 = time.perf_counter()

    def emit(r):
        print(format_result(r), flush=True)

    results = run_checks(args.criteria, quick=args.quick, m_set=args.m_set,
                         override_tol=args.override_tol, on_result=emit)
    failed = [r for r in results if not r.passed]
    print(f"{len(results) - len(failed)}/{len(results)} checks passed in {time.perf_counter() - t0:.1f} s")
    for r in failed:
        print(f"failed: [{r.criterion}] {r.name}")
    return EXIT_VERIFY if failed else EXIT_OK


def cmd_figure(args) -> int:
    spec = FIGURES[args.fig]
    t0 = time.perf_counter()
    try:
        tables = figure_tables(args.fig, args.step)
    except ScanError as exc:
        print(f"error: numerical failure at lambda = {exc.lam:.12g}: {exc.cause}", file=sys.stderr)
        return EXIT_NUMERIC
    curves = figure_curves(args.fig, tables)
    svg = render_svg(curves, title=f"Posmom density, {spec.title}")
    _write_text(args.out, svg)

    # companion data keeps the full line even where the plot shows lambda >= 0
    stem = Path(args.out).with_suffix("")
    buf = io.StringIO()
    names = ("m",) + CSV_COLUMNS
    merged = {n: np.concatenate([np.full(t.lambdas.size, m) if n == "m" else t.columns()[n]
                                 for m, t in tables.items()]) for n in names}
    write_csv(buf, merged, names)
    _write_text(str(stem) + ".csv", buf.getvalue())
    first = next(iter(tables.values()))
    meta = manifest(f"figure {args.fig}", spec.m_values,
                    {"min": float(first.lambdas[0]), "max": float(first.lambdas[-1]), "step": args.step},
                    QuadratureConfig(), Backend.QUADRATURE.value, time.perf_counter() - t0)
    meta["data_file"] = stem.name + ".csv"
    meta["figure_file"] = Path(args.out).name
    _write_text(str(stem) + ".manifest.json", json.dumps(meta, indent=1) + "\n")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="posmom", description="Posmom spectral densities of angular-momentum states.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    d = sub.add_parser("density", help="tabulate p_m(lambda) and its sector parts")
    d.add_argument("--m", type=int, required=True)
    d.add_argument("--min", type=float, default=None, help="default -(|m|/2 + 6)")
    d.add_argument("--max", type=float, default=None, help="default |m|/2 + 6")
    d.add_argument("--step", type=float, default=0.01)
    d.add_argument("--backend", choices=[b.value for b in Backend], default=Backend.QUADRATURE.value)
    d.add_argument("--out", default=None, help="output path (stdout if omitted)")
    d.add_argument("--format", choices=["csv", "json"], default=None)
    d.set_defaults(func=cmd_density)

    v = sub.add_parser("verify", help="run the numerical self-checks")
    v.add_argument("--quick", action="store_true", help="reduced grids and m-ranges")
    v.add_argument("--m-set", type=_parse_m_set, default=None, help="e.g. 0,1,2")
    v.add_argument("--criteria", type=_parse_m_set, default=None, help="subset of check groups, e.g. 1,5")
    v.add_argument("--override-tol", type=float, default=None, help="replace every tolerance")
    v.set_defaults(func=cmd_verify)

    f = sub.add_parser("figure", help="write an SVG density plot")
    f.add_argument("--fig", type=int, required=True, choices=sorted(FIGURES))
    f.add_argument("--out", required=True)
    f.add_argument("--step", type=float, default=0.01)
    f.set_defaults(func=cmd_figure)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except _UsageError as exc:
        print(exc, file=sys.stderr)
        return EXIT_USAGE
    except SystemExit as exc:  # --help / --version
        return int(exc.code or 0)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())

"""Command-line interface.

Exit codes: 0 success, 2 unreadable input or unknown suite, 3 internal
invariant violation, 4 non-commuting input where commuting is required,
5 subspace not invariant.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import sys
from pathlib import Path

from .classify import InvariantViolation, classify
from .core import DEFAULT_TOL, Tolerance, is_commuting
from .extension import ExtensionError, extension_report, invariance_residual
from .koszul import auto_grid, taylor_spectrum_grid
from .models import gallery
from .suites import SUITES, run_suite
from .tuplefile import (TupleFileError, dumps_tuple, loads_grid, loads_subspace,
                        read_tuple)

EXIT_OK, EXIT_PARSE, EXIT_INVARIANT, EXIT_NONCOMMUTING, EXIT_NOT_INVARIANT = 0, 2, 3, 4, 5


def _tol(args) -> Tolerance:
    return Tolerance(rel=args.tol, abs=DEFAULT_TOL.abs)


def _emit(text: str, out: str | None):
    if out:
        Path(out).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)


def _fail(code: int, msg: str) -> int:
    print(f"error: {msg}", file=sys.stderr)
    return code


def cmd_classify(args) -> int:
    tf = read_tuple(args.input)
    rep = classify(tf.tuple, _tol(args))
    if rep.hierarchy_violations():
        return _fail(EXIT_INVARIANT, f"hierarchy violated: {rep.hierarchy_violations()}")
    doc = rep.to_dict()
    if tf.name:
        doc["name"] = tf.name
    if tf.expected:
        doc["expected_mismatches"] = {k: v for k, v in tf.expected.items()
                                      if k in rep.flags and rep.flags[k] != v}
    if args.csv:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["flag", "value", "verdict", "residual"])
        for k, v in doc["flags"].items():
            w.writerow([k, v, doc["verdicts"][k], repr(doc["residuals"][k])])
        for m, state in doc["method_agreement"].items():
            w.writerow([f"spherically_qn[{m}]", state == "true", state,
                        repr(doc["method_residuals"][m])])
        _emit(buf.getvalue(), args.out)
    else:
        _emit(json.dumps(doc, indent=2) + "\n", args.out)
    return EXIT_OK


def cmd_koszul(args) -> int:
    tf = read_tuple(args.input)
    T, tol = tf.tuple, _tol(args)
    ok, res = is_commuting(T, tol)
    if not ok:
        return _fail(EXIT_NONCOMMUTING, f"tuple is not commuting (residual {res:.3e})")
    if args.grid:
        grid = loads_grid(Path(args.grid).read_text(encoding="utf-8"), T.d)
    else:
        grid = auto_grid(T, tol)
    rows = taylor_spectrum_grid(T, grid, tol)
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    header = []
    for k in range(1, T.d + 1):
        header += [f"lambda{k}_re", f"lambda{k}_im"]
    header += ["exact"] + [f"h_{p}" for p in range(T.d + 1)]
    w.writerow(header)
    for g in rows:
        vals = []
        for z in g.lam:
            vals += [repr(z.real), repr(z.imag)]
        w.writerow(vals + [str(g.exact).lower()] + list(g.betti))
    _emit(buf.getvalue(), args.out)
    return EXIT_OK


def cmd_suite(args) -> int:
    if args.suite not in SUITES:
        return _fail(EXIT_PARSE, f"unknown suite {args.suite!r}; known: {', '.join(SUITES)}")
    res = run_suite(args.suite, args.trials, args.seed, _tol(args))
    summary = {"suite": res.suite, "trials": res.trials, "seed": args.seed,
               "failures": res.failures, "indeterminate": res.indeterminate,
               "elapsed_s": res.elapsed}
    if args.suite == "conjecture":
        cands = res.details.get("candidates", [])
        Path(args.candidates).write_text(json.dumps(cands, indent=2) + "\n",
                                         encoding="utf-8")
        summary["candidates"] = len(cands)
        summary["candidates_file"] = str(args.candidates)
        summary["hyponormal_trials"] = res.details.get("hyponormal_trials")
    else:
        summary["details"] = res.details
    _emit(json.dumps(summary, indent=2, default=str) + "\n", args.out)
    if args.log:
        Path(args.log).write_text(json.dumps(res.to_dict(), indent=2, default=str) + "\n",
                                  encoding="utf-8")
    if args.suite == "conjecture":
        return EXIT_OK
    return EXIT_OK if res.passed else 1


def cmd_extension_report(args) -> int:
    tf = read_tuple(args.input)
    N, tol = tf.tuple, _tol(args)
    H = loads_subspace(Path(args.subspace).read_text(encoding="utf-8"), N.dim)
    try:
        doc = extension_report(N, H, tol)
    except ExtensionError as exc:
        if "invariant" in str(exc):
            msg = str(exc)
            if "residual" not in msg:
                msg += f" (residual {invariance_residual(N, H):.3e})"
            return _fail(EXIT_NOT_INVARIANT, msg)
        return _fail(EXIT_PARSE, str(exc))
    _emit(json.dumps(doc, indent=2, default=str) + "\n", args.out)
    return EXIT_OK


def cmd_gallery(args) -> int:
    entries = gallery()
    if args.list:
        for e in entries:
            print(f"{e.name}\td={e.T.d}\tdim={e.T.dim}")
        return EXIT_OK
    outdir = Path(args.outdir)
    outdir.mkdir(parents=True, exist_ok=True)
    for e in entries:
        if args.name and e.name not in args.name:
            continue
        (outdir / f"{e.name}.json").write_text(dumps_tuple(e.T, e.name, e.expected),
                                               encoding="utf-8")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="quasinormal",
                                 description="Analyze commuting operator tuples.")
    sub = ap.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--tol", type=float, default=DEFAULT_TOL.rel,
                       help="relative tolerance (default %(default)g)")
        p.add_argument("--out", default=None, help="output file (default stdout)")

    p = sub.add_parser("classify", help="classification report for a tuple file")
    p.add_argument("input")
    fmt = p.add_mutually_exclusive_group()
    fmt.add_argument("--json", action="store_true", default=True)
    fmt.add_argument("--csv", action="store_true")
    common(p)
    p.set_defaults(fn=cmd_classify)

    p = sub.add_parser("koszul", help="Taylor spectrum grid scan as CSV")
    p.add_argument("input")
    g = p.add_mutually_exclusive_group()
    g.add_argument("--grid", help="JSON file with grid points")
    g.add_argument("--auto", action="store_true",
                   help="joint eigenvalues plus a ring around each (default)")
    common(p)
    p.set_defaults(fn=cmd_koszul)

    p = sub.add_parser("theorem-suite", aliases=["suite"], help="run a theorem suite")
    p.add_argument("--suite", required=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--trials", type=int, default=None)
    p.add_argument("--log", default=None, help="write the full result here")
    p.add_argument("--candidates", default="conjecture_candidates.json",
                   help="conjecture suite: where to write candidates")
    common(p)
    p.set_defaults(fn=cmd_suite)

    p = sub.add_parser("extension-report", help="normal-extension workbench report")
    p.add_argument("input", help="tuple file holding the normal tuple N")
    p.add_argument("--subspace", required=True, help="JSON file with basis columns of H")
    common(p)
    p.set_defaults(fn=cmd_extension_report)

    p = sub.add_parser("gallery", help="export gallery tuples as tuple files")
    p.add_argument("--outdir", default="gallery")
    p.add_argument("--name", action="append", help="export only these entries")
    p.add_argument("--list", action="store_true")
    p.set_defaults(fn=cmd_gallery)
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.fn(args)
    except (TupleFileError, OSError) as exc:
        return _fail(EXIT_PARSE, str(exc))
    except InvariantViolation as exc:
        return _fail(EXIT_INVARIANT, str(exc))


if __name__ == "__main__":
    raise SystemExit(main())

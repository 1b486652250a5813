"""Command-line entry point ``wstar-metric``.

Exit codes: 0 success, 1 a monotonicity/invariance violation was found,
2 usage or validation error.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import os
import sys
from pathlib import Path

from .algebra import AlgebraSignature
from .errors import WStarError
from .funcalc import CATALOG, catalog_listing, resolve_functions
from .metrics import gram
from .states import random_faithful_state, state_from_json
from .verify import (
    DEFAULT_POOL,
    DEFAULT_TOL,
    SearchConfig,
    cencov_reduction_check,
    counterexample_search,
    invariance_suite,
    monotonicity_suite,
    two_form_check,
)

SEED_ENV = "WSTAR_METRIC_SEED"
CENCOV_TOL = 1e-10
TWO_FORM_TOL = 1e-9


class UsageError(Exception):
    pass


def _default_seed() -> int:
    raw = os.environ.get(SEED_ENV)
    if raw is None:
        return 0
    try:
        return int(raw)
    except ValueError:
        raise UsageError(f"{SEED_ENV} must be an integer, got {raw!r}") from None


def _functions(spec: str):
    try:
        return resolve_functions(spec)
    except WStarError as exc:
        raise UsageError(str(exc)) from None


def _emit(text: str, out: str | None):
    if out:
        Path(out).write_text(text)
    else:
        sys.stdout.write(text)
        if not text.endswith("\n"):
            sys.stdout.write("\n")


def _dump(doc) -> str:
    return json.dumps(doc, indent=2, sort_keys=True) + "\n"


def cmd_metric_eval(args) -> int:
    f = _functions(args.f)
    if len(f) != 1:
        raise UsageError("metric eval takes exactly one function")
    f = f[0]
    seed = args.seed if args.seed is not None else _default_seed()
    if args.state_file:
        rho = state_from_json(Path(args.state_file).read_text())
        if args.sig and AlgebraSignature.parse(args.sig) != rho.signature:
            raise UsageError(f"--sig {args.sig} does not match the state file signature [{rho.signature}]")
        report = gram(f, rho)
    else:
        if not args.sig:
            raise UsageError("--sig is required without --state-file")
        sig = AlgebraSignature.parse(args.sig)
        rho = random_faithful_state(sig, seed, floor=min(1e-4, 0.5 / sig.matrix_size))
        report = gram(f, rho, state_seed=seed)
    if args.format == "csv":
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        for row in report.gram:
            writer.writerow([repr(float(x)) for x in row])
        _emit(buf.getvalue(), args.out)
    else:
        _emit(_dump(report.to_json()), args.out)
    return 0


def cmd_verify(args) -> int:
    seed = args.seed if args.seed is not None else _default_seed()
    functions = _functions(args.f)
    if args.suite == "cencov":
        per_f = {f.name: cencov_reduction_check(f, args.n, args.trials, seed) for f in functions}
        worst = max(per_f.values())
        doc = {"suite": "cencov", "n": args.n, "trials": args.trials, "max_deviation": worst,
               "per_function": per_f, "tolerance": CENCOV_TOL}
        failed = worst > CENCOV_TOL
    elif args.suite == "two-form":
        doc = two_form_check(functions, args.sig or "2", args.trials, seed)
        doc.update(suite="two-form", tolerance=TWO_FORM_TOL)
        failed = doc["max_relative_gap"] > TWO_FORM_TOL
    elif args.suite == "invariance":
        doc = invariance_suite(functions, args.kind, args.trials, seed, args.tol)
        failed = bool(doc["violations"])
    else:
        doc = monotonicity_suite(functions, args.sig or "2", args.target, args.trials, seed, args.tol, args.kraus_max)
        failed = bool(doc["violations"])
    doc["verdict"] = "violation" if failed else "pass"
    _emit(_dump(doc), args.out)
    return 1 if failed else 0


SEARCH_KEYS = {
    "trials": int,
    "seed": int,
    "workers": int,
    "tolerance": float,
    "kraus_min": int,
    "kraus_max": int,
    "state_floor": float,
    "signatures": str,
    "functions": str,
    "out": str,
    "csv": str,
}


def read_config_file(path) -> dict:
    """Flat ``key = value`` file; ``#`` starts a comment."""
    values = {}
    for lineno, line in enumerate(Path(path).read_text().splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise UsageError(f"{path}:{lineno}: expected key = value")
        key, value = (p.strip() for p in line.split("=", 1))
        key = key.replace("-", "_")
        if key not in SEARCH_KEYS:
            raise UsageError(f"{path}:{lineno}: unknown key {key!r}")
        try:
            values[key] = SEARCH_KEYS[key](value)
        except ValueError:
            raise UsageError(f"{path}:{lineno}: bad value for {key}: {value!r}") from None
    return values


def cmd_search(args) -> int:
    settings = read_config_file(args.config) if args.config else {}
    for key in SEARCH_KEYS:
        val = getattr(args, key, None)
        if val is not None:
            settings[key] = val
    if "seed" not in settings:
        settings["seed"] = _default_seed()
    sigs = settings.pop("signatures", None)
    funcs = settings.pop("functions", "all")
    out = settings.pop("out", None)
    csv_path = settings.pop("csv", None)
    try:
        cfg = SearchConfig(
            signatures=tuple(s for s in sigs.split(";") if s.strip()) if sigs else DEFAULT_POOL,
            functions=tuple(f.name for f in _functions(funcs)),
            **settings,
        )
    except (ValueError, TypeError) as exc:
        raise UsageError(str(exc)) from None
    result = counterexample_search(cfg)
    summary = result.summary_json() + "\n"
    if out:
        Path(out).write_text(summary)
        if csv_path is None:
            csv_path = str(Path(out).with_suffix(".csv"))
    else:
        sys.stdout.write(summary)
    if csv_path:
        Path(csv_path).write_text(result.csv_text())
    md = result.min_defect
    print(f"min defect: {md!r}  violations: {len(result.violations)}  skipped: {result.skipped}/{cfg.trials}",
          file=sys.stderr if not out else sys.stdout)
    return 1 if result.violations else 0


def cmd_catalog(args) -> int:
    if args.format == "json":
        _emit(_dump(catalog_listing()), None)
    else:
        for entry in catalog_listing():
            print(f"{entry['name']:<10} f(t) = {entry['formula']:<18} f(1) = {entry['f(1)']:g}")
    return 0


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(2, f"{self.prog}: error: {message}\n")


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="wstar-metric", description="Monotone metrics on faithful states of finite-dimensional W*-algebras")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    metric = sub.add_parser("metric", help="metric evaluation")
    msub = metric.add_subparsers(dest="action", required=True, parser_class=_Parser)
    ev = msub.add_parser("eval", help="Gram matrix in the orthonormal tangent basis")
    ev.add_argument("--sig", help='block dimensions, e.g. "2" or "1,2"')
    ev.add_argument("--f", default="sld", help=f"one of {', '.join(CATALOG)}")
    ev.add_argument("--seed", type=int, default=None, help=f"state seed (falls back to ${SEED_ENV})")
    ev.add_argument("--state-file", help="state JSON document")
    ev.add_argument("--format", choices=("json", "csv"), default="json")
    ev.add_argument("--out")
    ev.set_defaults(handler=cmd_metric_eval)

    ver = sub.add_parser("verify", help="run a verification suite")
    ver.add_argument("suite", choices=("monotonicity", "invariance", "cencov", "two-form"))
    ver.add_argument("--sig", help="source signature (monotonicity, two-form)")
    ver.add_argument("--target", help="target signature for monotonicity (default: same as --sig)")
    ver.add_argument("--f", default="all")
    ver.add_argument("--n", type=int, default=3, help="simplex size for cencov")
    ver.add_argument("--kind", choices=("classical", "quantum", "both"), default="both")
    ver.add_argument("--trials", type=int, default=100)
    ver.add_argument("--seed", type=int, default=None)
    ver.add_argument("--tol", type=float, default=DEFAULT_TOL)
    ver.add_argument("--kraus-max", type=int, default=4)
    ver.add_argument("--out")
    ver.set_defaults(handler=cmd_verify)

    se = sub.add_parser("search", help="randomized search for monotonicity violations")
    se.add_argument("--config", help="flat key = value file; flags override it")
    se.add_argument("--trials", type=int)
    se.add_argument("--seed", type=int)
    se.add_argument("--workers", type=int)
    se.add_argument("--tolerance", "--tol", type=float, dest="tolerance")
    se.add_argument("--kraus-min", type=int, dest="kraus_min")
    se.add_argument("--kraus-max", type=int, dest="kraus_max")
    se.add_argument("--state-floor", type=float, dest="state_floor")
    se.add_argument("--signatures", help='pool separated by ";", e.g. "2;1,1;1,2"')
    se.add_argument("--functions", "--f", dest="functions")
    se.add_argument("--out", help="summary JSON path (CSV goes next to it)")
    se.add_argument("--csv", help="per-trial CSV path")
    se.set_defaults(handler=cmd_search)

    cat = sub.add_parser("catalog", help="list the shipped monotone functions")
    cat.add_argument("--format", choices=("text", "json"), default="text")
    cat.set_defaults(handler=cmd_catalog)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.handler(args)
    except (UsageError, WStarError, OSError, json.JSONDecodeError) as exc:
        print(f"wstar-metric: error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())

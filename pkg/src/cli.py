# src/cli.py
# Terminal interface: Â-forms, Mehler kernels and the verification suites.

import argparse
import json
import math
import sys
import time
from pathlib import Path
from typing import Dict, List, Optional

import numpy as np
import pandas as pd
from dotenv import load_dotenv
from tabulate import tabulate

from models.schemas import CheckResult, Report, SuiteProfile

from .errors import DimensionError, DomainError, GetzlerError, IngestionError
from .exterior import mask_to_indices, popcount
from .geometry import RiemannTensor
from .getzler import ahat_form, index_density, mehler_expansion, mehler_kernel
from .loader import list_fixtures, load_curvature
from .logs import configure_logging
from .oracles import ahat_series_oracle, index_density_oracle
from .profiles import load_profile, merge_overrides
from .storage import build_report, write_report
from .validation import SUITES, feasible_suites, validate_dimension, validate_suite, validate_time, validate_vector
from .verify import run_suites

EXIT_PASS, EXIT_FAIL, EXIT_INPUT = 0, 1, 2
ORACLE_TOL = 1e-10


class InputError(Exception):
    """Bad command-line input; maps to exit code 2."""


def _input(fn, *args):
    try:
        return fn(*args)
    except DomainError as exc:
        raise InputError(str(exc)) from exc


def parse_args(argv: Optional[List[str]] = None) -> argparse.Namespace:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("-v", "--verbose", action="count", default=0, help="-v for INFO, -vv for DEBUG logs on stderr")
    common.add_argument("--report", default=None, help="Write a YAML report to this path")
    common.add_argument("--profile", default=None, help="Suite profile (default, quick, thorough; env GETZLER_PROFILE)")
    common.add_argument("--overrides-json", default=None,
                        help='Profile overrides, e.g. \'{"tolerances": {"theorem3": 1e-3}}\'')
    common.add_argument("--timing", action="store_true", help="Record wall time in the report")

    p = argparse.ArgumentParser(
        prog="getzler",
        description="Local index density checks: Â-forms, Mehler kernels, Getzler rescaling.",
    )
    sub = p.add_subparsers(dest="cmd", required=True)

    a = sub.add_parser("ahat", parents=[common], help="Â-form of a curvature tensor")
    a.add_argument("file", help="Curvature YAML file or fixture name")
    a.add_argument("--degree", type=int, default=None, help="Only print this even degree")
    a.add_argument("--density", action="store_true", help="Also print the index density")

    m = sub.add_parser("mehler", parents=[common], help="Mehler kernel at (v, t)")
    m.add_argument("file", help="Curvature YAML file or fixture name")
    m.add_argument("--v", required=True, help="Comma-separated vector, e.g. 1,0,0,0")
    m.add_argument("--t", required=True, type=float, help="Time t > 0")

    vf = sub.add_parser("verify", parents=[common], help="Run a verification suite")
    vf.add_argument("suite", help=f"One of {', '.join(SUITES)} or all")
    vf.add_argument("--seed", type=int, default=0)
    vf.add_argument("--n", type=int, default=4, help="Dimension (even)")
    vf.add_argument("--jobs", type=int, default=None, help="Run suites on this many threads (env GETZLER_JOBS)")

    sub.add_parser("fixtures", parents=[common], help="List curvature fixtures")
    return p.parse_args(argv)


def _profile(args) -> SuiteProfile:
    overrides = json.loads(args.overrides_json) if args.overrides_json else None
    return merge_overrides(load_profile(args.profile), overrides)


def _blade_label(mask: int) -> str:
    idx = mask_to_indices(mask)
    return "1" if not idx else "e" + "".join(str(i) for i in idx)


def _form_rows(data: np.ndarray, degree: Optional[int] = None) -> pd.DataFrame:
    rows = []
    for mask, c in enumerate(data):
        d = popcount(mask)
        if degree is not None and d != degree:
            continue
        if abs(c) > 0.0:
            rows.append({"degree": d, "blade": _blade_label(mask), "coefficient": float(np.real(c))})
    return pd.DataFrame(rows, columns=["degree", "blade", "coefficient"])


def _check_table(checks: List[CheckResult]) -> pd.DataFrame:
    return pd.DataFrame([
        {"suite": c.suite, "check": c.name, "status": "pass" if c.passed else "fail",
         "max_error": c.max_error, "tolerance": c.tolerance, "order": c.order}
        for c in checks
    ])


def cmd_ahat(args) -> Report:
    loaded = load_curvature(args.file)
    R = loaded.tensor
    n = R.dimension
    if args.degree is not None and (args.degree < 0 or args.degree > n or args.degree % 2):
        raise InputError(f"--degree must be even and between 0 and {n}")
    ahat = ahat_form(R).to_multivector()
    oracle = ahat_series_oracle(R)
    err = float(np.max(np.abs(ahat.data - oracle.data)))
    checks = [CheckResult(suite="ahat", name="Â against the log(x/sinh x) series", passed=err <= ORACLE_TOL,
                          max_error=err, tolerance=ORACLE_TOL)]
    tables = {"ahat": _form_rows(ahat.data, args.degree)}
    if args.density:
        density = index_density(R)
        derr = abs(density - index_density_oracle(R, oracle))
        checks.append(CheckResult(suite="ahat", name="index density", passed=derr <= ORACLE_TOL, max_error=derr,
                                  tolerance=ORACLE_TOL, detail={"value": density}))
    inputs = {"file": loaded.digest, "degree": args.degree, "density": args.density}
    return build_report("ahat", inputs, checks, tables, n=n)


def cmd_mehler(args) -> Report:
    loaded = load_curvature(args.file)
    R = loaded.tensor
    n = R.dimension
    v = _input(validate_vector, args.v, n)
    t = _input(validate_time, args.t)
    value = mehler_kernel(R, v, t).to_multivector()
    dual = mehler_expansion(R).evaluate(v, t)
    err = float(np.max(np.abs(value.data - dual.data)))
    flat = mehler_kernel(RiemannTensor.zeros(n), v, t).to_multivector()
    gauss = (4.0 * math.pi * t) ** (-n / 2) * math.exp(-v.norm_squared() / (4.0 * t))
    flat_err = float(np.max(np.abs(flat.data - np.eye(1, 1 << n, 0)[0] * gauss)))
    checks = [
        CheckResult(suite="mehler", name="closed form = expansion in (v, t)", passed=err <= ORACLE_TOL,
                    max_error=err, tolerance=ORACLE_TOL),
        CheckResult(suite="mehler", name="flat kernel = (4πt)^{-n/2} e^{-|v|²/4t}", passed=flat_err <= ORACLE_TOL,
                    max_error=flat_err, tolerance=ORACLE_TOL, detail={"gaussian": gauss}),
    ]
    inputs = {"file": loaded.digest, "v": v.components.tolist(), "t": t}
    return build_report("mehler", inputs, checks, {"mehler": _form_rows(value.data)}, n=n)


def cmd_verify(args, profile: SuiteProfile) -> Report:
    n = validate_dimension(args.n)
    names = feasible_suites(_input(validate_suite, args.suite), n)
    if not names:
        raise DimensionError(f"suite {args.suite} is infeasible for n={n}")
    outcomes = run_suites(names, n, args.seed, profile, jobs=args.jobs)
    checks = [c for o in outcomes for c in o.checks]
    tables: Dict[str, pd.DataFrame] = {}
    for o in outcomes:
        tables.update(o.tables)
    inputs = {"suite": args.suite, "seed": args.seed, "n": n, "profile": profile.model_dump()}
    return build_report("verify", inputs, checks, tables, seed=args.seed, n=n, profile=profile.name)


def _print_report(report: Report) -> None:
    for name, rows in report.tables.items():
        if rows:
            print(f"\n{name}:")
            print(tabulate(pd.DataFrame(rows), headers="keys", tablefmt="github", showindex=False))
    if report.checks:
        print("\nChecks:")
        print(tabulate(_check_table(report.checks), headers="keys", tablefmt="github", showindex=False))
        for c in report.checks:
            if c.name == "index density":
                print(f"\nIndex density: {c.detail['value']:.12g}")


def main(argv: Optional[List[str]] = None) -> int:
    load_dotenv()
    args = parse_args(argv)
    configure_logging(args.verbose)
    start = time.perf_counter()

    try:
        if args.cmd == "fixtures":
            print(tabulate(list_fixtures(), headers="keys", tablefmt="github", showindex=False))
            return EXIT_PASS
        if args.cmd == "ahat":
            report = cmd_ahat(args)
        elif args.cmd == "mehler":
            report = cmd_mehler(args)
        else:
            report = cmd_verify(args, _input(_profile, args))
    except (InputError, IngestionError, DimensionError, FileNotFoundError, json.JSONDecodeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except GetzlerError as exc:
        print(f"check failed: {exc}", file=sys.stderr)
        return EXIT_FAIL

    if args.timing:
        report = report.model_copy(update={"wall_time": round(time.perf_counter() - start, 3)})
    _print_report(report)
    if args.report:
        path = write_report(report, Path(args.report))
        print(f"\nSaved report → {path}")
    return EXIT_PASS if report.passed else EXIT_FAIL


if __name__ == "__main__":
    sys.exit(main())

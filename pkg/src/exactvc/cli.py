"""Command-line surface: fit commands, degree formulas, randomized audit.

Exit codes: 0 success, 2 malformed input, 3 model-assumption violation,
4 degenerate-data or tie diagnostics. All reports go to standard output
as deterministic JSON (sorted keys); --emit-poly switches a fit command
to bare coefficient lines for diff-based comparison.
"""

from __future__ import annotations

import argparse
import random
import sys
from dataclasses import dataclass
from fractions import Fraction
from typing import List, Optional

from . import covariates as cov
from . import io as xio
from . import oneway
from .errors import (
    DegenerateDataError,
    DegenerateDesignError,
    ExactVCError,
    InputError,
    ModelAssumptionError,
    NongenericDataError,
    RankDeficiencyError,
    UndefinedInputError,
)
from .stats import OneWayStats, ml_degree, multiplicity_profile, reml_degree
from .twoway import fit_twoway

EXIT_OK = 0
EXIT_INPUT = 2
EXIT_MODEL = 3
EXIT_DIAGNOSTIC = 4


@dataclass(frozen=True)
class RunConfig:
    """Validated run parameters shared by the fit commands."""

    command: str
    method: str = "both"
    input_path: Optional[str] = None
    input_kind: Optional[str] = None        # csv-long | stats-json
    refine_width: Fraction = Fraction(1, 10 ** 12)
    emit_poly: bool = False
    seed: int = 0

    def __post_init__(self):
        if self.refine_width <= 0:
            raise InputError("refine width must be positive")
        if self.emit_poly and self.method == "both":
            raise InputError(
                "--emit-poly requires a single method, not both")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="exactvc",
        description="Exact variance-components estimation: certified "
                    "solutions of ML and REML critical equations.")
    sub = parser.add_subparsers(dest="command", required=True)

    def add_fit_common(p):
        src = p.add_mutually_exclusive_group(required=True)
        src.add_argument("--csv", metavar="PATH",
                         help="long-format CSV input")
        src.add_argument("--stats", metavar="PATH",
                         help="sufficient-statistics JSON input")
        p.add_argument("--refine-width", default="1/1000000000000",
                       metavar="RAT",
                       help="width to which root enclosures are refined "
                            "(exact rational, default 10^-12)")
        p.add_argument("--emit-poly", action="store_true",
                       help="print the primitive integer coefficients of "
                            "the profile polynomial, lowest degree first, "
                            "one per line, instead of the JSON report")

    fo = sub.add_parser(
        "fit-oneway",
        help="unbalanced one-way layout, optional covariates")
    fo.add_argument("--method", choices=["ML", "REML", "both"],
                    default="both")
    add_fit_common(fo)
    fo.add_argument("--add-intercept", action="store_true",
                    help="prepend an all-ones column to a covariates CSV")

    ft = sub.add_parser("fit-twoway", help="balanced two-way layout")
    ft.add_argument("--model", choices=["additive", "interaction"],
                    default="additive")
    add_fit_common(ft)

    dg = sub.add_parser(
        "degree",
        help="predicted cancelled-numerator degrees for a size profile")
    dg.add_argument("--sizes", required=True, metavar="N1,N2,...",
                    help="comma-separated group sizes, repeats allowed")

    au = sub.add_parser(
        "audit",
        help="randomized check of the degree formulas (and, with "
             "--covariates, the conjectured degree ceiling)")
    au.add_argument("--q", type=int, required=True,
                    help="number of groups per instance")
    au.add_argument("--trials", type=int, required=True)
    au.add_argument("--seed", type=int, default=0)
    au.add_argument("--covariates", type=int, default=None, metavar="P",
                    help="audit intercept+P-column covariate designs "
                         "against the conjectured ceiling instead")
    return parser


# ----------------------------------------------------------------------
# fit-oneway
# ----------------------------------------------------------------------

def _parse_refine_width(text: str) -> Fraction:
    return xio.parse_rational(text)


def _methods(method: str) -> List[str]:
    return ["ML", "REML"] if method == "both" else [method]


def _run_fit_oneway(args) -> int:
    cfg = RunConfig(
        command="fit-oneway", method=args.method,
        input_path=args.csv or args.stats,
        input_kind="csv-long" if args.csv else "stats-json",
        refine_width=_parse_refine_width(args.refine_width),
        emit_poly=args.emit_poly)
    if cfg.input_kind == "stats-json":
        subject = xio.load_oneway_stats_json(cfg.input_path)
    else:
        kind = xio.detect_csv_kind(cfg.input_path)
        if kind == "oneway":
            subject = xio.load_oneway_csv(cfg.input_path)
        elif kind == "covariates":
            subject = xio.load_covariates_csv(
                cfg.input_path, add_intercept=args.add_intercept)
        else:
            raise InputError(
                f"{cfg.input_path}: two-way CSV given to fit-oneway")
    module = oneway if isinstance(subject, OneWayStats) else cov
    fits = {}
    for m in _methods(cfg.method):
        fitter = module.ml_fit if m == "ML" else module.reml_fit
        fits[m] = fitter(subject, refine_width=cfg.refine_width)
    if cfg.emit_poly:
        only = fits[_methods(cfg.method)[0]]
        sys.stdout.write(xio.emit_poly_text(only.equation.numerator))
    elif cfg.method == "both":
        sys.stdout.write(xio.dumps({
            "ml": xio.oneway_report(fits["ML"], "ML"),
            "reml": xio.oneway_report(fits["REML"], "REML"),
        }))
    else:
        sys.stdout.write(xio.dumps(
            xio.oneway_report(fits[cfg.method], cfg.method)))
    return EXIT_DIAGNOSTIC if any(f.tie for f in fits.values()) else EXIT_OK


# ----------------------------------------------------------------------
# fit-twoway
# ----------------------------------------------------------------------

def _run_fit_twoway(args) -> int:
    cfg = RunConfig(
        command="fit-twoway", method="ML",
        input_path=args.csv or args.stats,
        input_kind="csv-long" if args.csv else "stats-json",
        refine_width=_parse_refine_width(args.refine_width),
        emit_poly=args.emit_poly)
    if cfg.input_kind == "stats-json":
        stats = xio.load_twoway_stats_json(cfg.input_path)
    else:
        stats = xio.load_twoway_csv(cfg.input_path)
    rep = fit_twoway(stats, model=args.model,
                     refine_width=cfg.refine_width)
    if cfg.emit_poly:
        sys.stdout.write(xio.emit_poly_text(rep.quartic))
    else:
        sys.stdout.write(xio.dumps(xio.twoway_report(rep)))
    diagnostic = rep.tie or rep.nongeneric is not None
    return EXIT_DIAGNOSTIC if diagnostic else EXIT_OK


# ----------------------------------------------------------------------
# degree
# ----------------------------------------------------------------------

def _run_degree(args) -> int:
    try:
        sizes = [int(s) for s in args.sizes.split(",") if s.strip()]
    except ValueError as exc:
        raise InputError(f"bad --sizes value {args.sizes!r}") from exc
    M, _, M2 = multiplicity_profile(sizes)
    sys.stdout.write(xio.dumps(
        {"ml": ml_degree(M, M2), "reml": reml_degree(M, M2)}))
    return EXIT_OK


# ----------------------------------------------------------------------
# audit
# ----------------------------------------------------------------------

def _random_oneway_stats(rng: random.Random, q: int) -> OneWayStats:
    while True:
        sizes = [rng.randint(1, 30) for _ in range(q)]
        if max(sizes) >= 2:
            break
    _, mults, _ = multiplicity_profile(sizes)
    distinct = sorted(set(sizes))
    means = [Fraction(rng.randint(-40, 40), rng.randint(1, 8))
             for _ in distinct]
    between = [Fraction(0) if m == 1
               else Fraction(rng.randint(1, 60), rng.randint(1, 8))
               for m in mults]
    within = Fraction(rng.randint(1, 90), rng.randint(1, 8))
    return OneWayStats(tuple(distinct), tuple(mults), tuple(means),
                       tuple(between), within)


def _instance_payload(st: OneWayStats) -> dict:
    return {
        "sizes": list(st.sizes), "mults": list(st.mults),
        "means": [str(v) for v in st.means],
        "betweenSS": [str(v) for v in st.betweenSS],
        "withinSS": str(st.withinSS),
    }


def _audit_oneway(rng: random.Random, q: int, trials: int) -> dict:
    matches = 0
    mismatches = []
    for _ in range(trials):
        st = _random_oneway_stats(rng, q)
        finding = {}
        for name, builder in (("ml", oneway.ml_equation),
                              ("reml", oneway.reml_equation)):
            eq = builder(st)
            if not eq.degree_matches():
                finding[name] = {"observed": eq.observed_degree,
                                 "expected": eq.expected_degree}
        if finding:
            finding["instance"] = _instance_payload(st)
            mismatches.append(finding)
        else:
            matches += 1
    return {"degree_matches": matches, "degree_mismatches": mismatches}


def _random_design(rng: random.Random, q: int, p_extra: int) -> cov.DesignProblem:
    while True:
        sizes = [rng.randint(1, 5) for _ in range(q)]
        if max(sizes) < 2:
            continue
        n = sum(sizes)
        if n <= 1 + p_extra:
            continue
        y = tuple(Fraction(rng.randint(-30, 30), rng.randint(1, 6))
                  for _ in range(n))
        x = tuple(
            tuple([Fraction(1)]
                  + [Fraction(rng.randint(-9, 9), rng.randint(1, 3))
                     for _ in range(p_extra)])
            for _ in range(n))
        try:
            return cov.DesignProblem(y, x, tuple(sizes))
        except (RankDeficiencyError, ModelAssumptionError):
            continue


def _audit_covariates(rng: random.Random, q: int, trials: int,
                      p_extra: int) -> dict:
    checked = 0
    skipped = 0
    violations = []
    for _ in range(trials):
        design = _random_design(rng, q, p_extra)
        finding = {}
        for name, builder in (("ml", cov.ml_equation),
                              ("reml", cov.reml_equation)):
            try:
                eq = builder(design)
            except DegenerateDesignError:
                skipped += 1
                finding = {}
                break
            bound = cov.conjecture_bound(design, name.upper())
            if bound is not None and eq.observed_degree > bound:
                finding[name] = {"observed": eq.observed_degree,
                                 "bound": bound}
        else:
            checked += 1
            if finding:
                finding["instance"] = {
                    "group_sizes": list(design.group_sizes),
                    "y": [str(v) for v in design.y],
                    "x": [[str(v) for v in row] for row in design.x],
                }
                violations.append(finding)
    return {"conjecture": {"checked": checked, "skipped": skipped,
                           "violations": violations}}


def _run_audit(args) -> int:
    if args.q < 2:
        raise InputError("--q must be at least 2")
    if args.trials < 1:
        raise InputError("--trials must be positive")
    if args.covariates is not None and args.covariates < 0:
        raise InputError("--covariates must be nonnegative")
    rng = random.Random(args.seed)
    report = {
        "command": "audit", "q": args.q, "trials": args.trials,
        "seed": args.seed, "covariates": args.covariates,
    }
    if args.covariates is None:
        report.update(_audit_oneway(rng, args.q, args.trials))
    else:
        report.update(
            _audit_covariates(rng, args.q, args.trials, args.covariates))
    sys.stdout.write(xio.dumps(report))
    return EXIT_OK


# ----------------------------------------------------------------------
# dispatch
# ----------------------------------------------------------------------

_HANDLERS = {
    "fit-oneway": _run_fit_oneway,
    "fit-twoway": _run_fit_twoway,
    "degree": _run_degree,
    "audit": _run_audit,
}


def main(argv: Optional[List[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return _HANDLERS[args.command](args)
    except (InputError, UndefinedInputError) as exc:
        sys.stdout.write(xio.dumps(xio.error_report("input", str(exc))))
        return EXIT_INPUT
    except (DegenerateDataError, DegenerateDesignError,
            NongenericDataError) as exc:
        sys.stdout.write(xio.dumps(xio.error_report("degenerate", str(exc))))
        return EXIT_DIAGNOSTIC
    except ModelAssumptionError as exc:
        sys.stdout.write(xio.dumps(
            xio.error_report("model-assumption", str(exc))))
        return EXIT_MODEL
    except ExactVCError as exc:
        sys.stdout.write(xio.dumps(xio.error_report("internal", str(exc))))
        return 1


if __name__ == "__main__":
    sys.exit(main())

"""Command-line entry points: ``solve``, ``verify`` and ``oracle-test``.

Exit codes are the machine contract:

    0  success / every clause passed
    1  verification or oracle test failed
    2  fairness constraints infeasible
    3  malformed or invalid input, or an oracle that does not apply
    4  numerical breakdown, including an infeasible restricted primal
    5  family too large for brute force
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

import numpy as np

from . import io
from .errors import (
    FamilyTooLarge,
    InfeasibleFairness,
    NumericalBreakdown,
    OracleNotApplicable,
    RestrictedLPInfeasible,
    ValidationError,
)
from .model import check_fairness, validate_instance
from .oracle import DEFAULT_CAP, ORACLES, make_oracle
from .solver import SolveConfig, solve
from .verify import brute_force_optimum, check_guarantee, oracle_cross_check

EXIT_OK = 0
EXIT_FAIL = 1
EXIT_INFEASIBLE = 2
EXIT_INVALID = 3
EXIT_NUMERICAL = 4
EXIT_TOO_LARGE = 5


def _fail(code: int, message: str) -> int:
    print(f"fairselect: {message}", file=sys.stderr)
    return code


def _load_valid(path: str):
    instance, fairness = io.load_instance(path)
    violations = validate_instance(instance) + check_fairness(fairness, instance.m)
    if violations:
        raise ValidationError(violations)
    return instance, fairness


def cmd_solve(args) -> int:
    instance, fairness = _load_valid(args.instance)
    config = SolveConfig(epsilon=args.eps, radius=args.radius, max_iter=args.max_iter,
                         collect_all_runs=args.collect_all, enum_cap=args.cap)
    report = solve(instance, fairness, args.oracle, config)
    text = io.dumps(io.report_to_json(report, permutations=instance.is_permutation))
    if args.out:
        Path(args.out).write_text(text)
    else:
        sys.stdout.write(text)
    return EXIT_OK


def cmd_verify(args) -> int:
    instance, fairness = _load_valid(args.instance)
    report = io.load_report(args.report)
    baseline = brute_force_optimum(instance, fairness, cap=args.cap)
    check = check_guarantee(report, baseline, fairness, tol=args.tol, instance=instance)
    out = {
        "passed": check.passed,
        "opt": check.opt if baseline.feasible else None,
        "achieved": check.achieved,
        "ratio": check.ratio if baseline.feasible else None,
        "clauses": [{"name": c.name, "slack": c.slack, "passed": c.passed} for c in check.clauses],
    }
    sys.stdout.write(json.dumps(out, indent=2, default=float) + "\n")
    return EXIT_OK if check.passed else EXIT_FAIL


def cmd_oracle_test(args) -> int:
    instance, _ = _load_valid(args.instance)
    oracle = make_oracle(args.oracle, instance, cap=args.cap)
    rng = np.random.default_rng(args.seed)
    worst = float("inf")
    for _ in range(args.trials):
        coeffs = rng.uniform(0.0, args.scale, instance.m)
        worst = min(worst, oracle_cross_check(instance, coeffs, oracle, cap=args.cap))
    rho = oracle.guarantee.rho
    print(f"min ratio {worst!r} over {args.trials} trials (declared rho {rho!r})")
    return EXIT_OK if worst >= rho - 1e-6 else EXIT_FAIL


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="fairselect",
                                     description="Fair distributions over feasible selections.")
    parser.add_argument("-v", "--verbose", action="store_true", help="log search progress to stderr")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("solve", help="solve an instance file and write a report")
    p.add_argument("--instance", required=True)
    p.add_argument("--oracle", choices=ORACLES, default="exact")
    p.add_argument("--eps", type=float, default=1e-4, help="bisection precision on L")
    p.add_argument("--out", help="report path (default: standard output)")
    p.add_argument("--collect-all", action="store_true", help="restricted primal over sets from every run")
    p.add_argument("--radius", type=float, help="override the initial ellipsoid radius")
    p.add_argument("--max-iter", type=int, help="override the per-run iteration cap")
    p.add_argument("--cap", type=int, default=DEFAULT_CAP, help="enumeration cap for the exact oracle")
    p.set_defaults(func=cmd_solve)

    p = sub.add_parser("verify", help="check a report against the brute-force optimum")
    p.add_argument("--instance", required=True)
    p.add_argument("--report", required=True)
    p.add_argument("--cap", type=int, default=DEFAULT_CAP)
    p.add_argument("--tol", type=float, default=1e-3)
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("oracle-test", help="compare an oracle with enumeration on random coefficients")
    p.add_argument("--instance", required=True)
    p.add_argument("--oracle", choices=ORACLES, required=True)
    p.add_argument("--trials", type=int, default=100)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--cap", type=int, default=DEFAULT_CAP)
    p.add_argument("--scale", type=float, default=5.0, help="coefficients are drawn from [0, scale)")
    p.set_defaults(func=cmd_oracle_test)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING,
                        format="%(name)s: %(message)s")
    try:
        return args.func(args)
    except InfeasibleFairness as exc:
        return _fail(EXIT_INFEASIBLE, f"infeasible: {exc}")
    except FamilyTooLarge as exc:
        return _fail(EXIT_TOO_LARGE, str(exc))
    except ValidationError as exc:
        return _fail(EXIT_INVALID, str(exc))
    except OracleNotApplicable as exc:
        return _fail(EXIT_INVALID, f"oracle not applicable: {exc}")
    except (NumericalBreakdown, RestrictedLPInfeasible) as exc:
        return _fail(EXIT_NUMERICAL, f"numerical failure: {exc}")
    except OSError as exc:
        return _fail(EXIT_INVALID, f"cannot read input: {exc}")


if __name__ == "__main__":
    sys.exit(main())

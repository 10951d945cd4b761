"""Command-line front end: run a scenario file and gate on its tolerances.

Exit codes: 0 when every declared gate passes, 1 when a gate fails,
2 for scenario parse/validation errors or model-validity failures.
"""

from __future__ import annotations

import argparse
import sys

from .channel import CPViolationError
from .dephasing import BornValidityError
from .linalg import ValidationError
from .oracle import TruncationError
from .quadrature import QuadratureError
from .scenario import ScenarioError, load_scenario, run_scenario
from .tcl import IntegrationError

_MODEL_ERRORS = (ValidationError, QuadratureError, IntegrationError,
                 CPViolationError, BornValidityError, TruncationError)


def build_parser():
    parser = argparse.ArgumentParser(
        prog="tclkraus",
        description="Evolve small open quantum systems (TCL2 / Lindblad / "
                    "canonical Kraus / exact reference) from a scenario file "
                    "and emit CSV + JSON artifacts.",
    )
    parser.add_argument("--scenario", required=True, metavar="PATH",
                        help="scenario JSON file")
    parser.add_argument("--out", metavar="DIR", default=None,
                        help="output directory (overrides the scenario's)")
    parser.add_argument("--only", metavar="RUNS", default=None,
                        help="comma-separated subset of the scenario's runs")
    parser.add_argument("--quiet", action="store_true",
                        help="suppress progress output (errors still go to stderr)")
    return parser


def main(argv=None):
    args = build_parser().parse_args(argv)
    only = None
    if args.only is not None:
        only = [part.strip() for part in args.only.split(",") if part.strip()]
        if not only:
            print("error: --only: empty run list", file=sys.stderr)
            return 2
    try:
        scenario = load_scenario(args.scenario)
        code, _ = run_scenario(scenario, out_dir=args.out, only=only,
                               quiet=args.quiet)
    except ScenarioError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except _MODEL_ERRORS as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 2
    return code


if __name__ == "__main__":
    sys.exit(main())

"""Command-line driver.

Subcommands:

* ``run``     - execute one exact or Monte Carlo experiment and persist the
                report; with ``--check``, exit 1 when a distance exceeds its
                bound beyond the confidence allowance.
* ``bn``      - print the earlier analysis' Kolmogorov constant B_n.
* ``moments`` - print exact lightbulb moments for a given n.

Exit codes: 0 success (and all margins acceptable under ``--check``),
1 bound-margin violation in ``--check`` mode, 2 configuration error.
"""

from __future__ import annotations

import argparse
import json
import sys
from fractions import Fraction

from .errors import InvalidConfig, ZbestError
from .experiment import ExperimentConfig, compute_bn, default_workers, run
from .lightbulb import lightbulb_moments


def _parse_p(raw: str) -> tuple[Fraction, ...]:
    """Parse '0.3,0.5' into exact Fractions so exact mode stays rational."""
    try:
        return tuple(Fraction(part) for part in raw.split(","))
    except (ValueError, ZeroDivisionError) as exc:
        raise InvalidConfig(f"p: could not parse {raw!r}: {exc}") from exc


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="zbest",
        description="Coupling-based normal approximation experiments",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    runp = sub.add_parser("run", help="execute one experiment")
    runp.add_argument("--process", required=True, choices=("lightbulb", "bernoulli"))
    runp.add_argument("--n", type=int, help="stage/bulb count (lightbulb)")
    runp.add_argument("--p", type=str, help="comma-separated success probabilities")
    runp.add_argument("--mode", required=True, choices=("exact", "mc"))
    runp.add_argument("--samples", type=int, help="sample count (mc mode)")
    runp.add_argument("--seed", type=int, default=0)
    runp.add_argument(
        "--workers",
        type=int,
        default=None,
        help=f"worker threads (default: ${'{'}ZBEST_WORKERS{'}'} or 1)",
    )
    runp.add_argument("--out", type=str, required=True, help="report output path")
    runp.add_argument("--format", choices=("json", "csv"), default="json")
    runp.add_argument(
        "--check",
        action="store_true",
        help="exit 1 unless every bound margin is acceptable",
    )

    bnp = sub.add_parser("bn", help="print the prior-analysis constant B_n")
    bnp.add_argument("--n", type=int, required=True)

    momp = sub.add_parser("moments", help="print exact lightbulb moments")
    momp.add_argument("--n", type=int, required=True)

    return parser


def _cmd_run(args: argparse.Namespace) -> int:
    config = ExperimentConfig(
        process=args.process,
        mode=args.mode,
        seed=args.seed,
        workers=default_workers() if args.workers is None else args.workers,
        n=args.n,
        p=_parse_p(args.p) if args.p is not None else None,
        samples=args.samples,
        output_path=args.out,
        format=args.format,
    )
    report = run(config)
    d = report.distances
    print(f"report written to {args.out}")
    print(
        f"kolmogorov {d.kolmogorov:.6g} (bound {report.bound_kolmogorov:.6g}, "
        f"margin {report.bound_margin_k:.6g})"
    )
    print(
        f"wasserstein {d.wasserstein:.6g} (bound {report.bound_wasserstein:.6g}, "
        f"margin {report.bound_margin_w:.6g})"
    )
    if args.check and not report.margins_ok():
        print("bound margin violated", file=sys.stderr)
        return 1
    return 0


def _cmd_bn(args: argparse.Namespace) -> int:
    print(json.dumps({"n": args.n, "b_n": compute_bn(args.n)}))
    return 0


def _cmd_moments(args: argparse.Namespace) -> int:
    mom = lightbulb_moments(args.n)
    print(
        json.dumps(
            {
                "n": args.n,
                "mu": float(mom.mu),
                "sigma2": float(mom.sigma2),
                "lambda_n": float(mom.lambda_n),
                "mu_exact": str(mom.mu),
                "sigma2_exact": str(mom.sigma2),
                "lambda_n_exact": str(mom.lambda_n),
            }
        )
    )
    return 0


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        if args.command == "run":
            return _cmd_run(args)
        if args.command == "bn":
            return _cmd_bn(args)
        return _cmd_moments(args)
    except InvalidConfig as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return 2
    except ZbestError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())

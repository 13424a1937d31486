"""Command line: ``tcm2d run|sweep|verify --config PATH``."""

from __future__ import annotations

import argparse
import logging
import sys

from . import harness
from .errors import ParseError, ValidationError


def _epsilons(text):
    text = text.strip()
    if not text:
        return []
    try:
        return [float(x) for x in text.split(",") if x.strip()]
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"bad epsilon list {text!r}") from exc


def build_parser():
    parser = argparse.ArgumentParser(prog="tcm2d", description="Tropical climate model simulator and checks.")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)
    p_run = sub.add_parser("run", help="integrate one configuration and write its artifacts")
    p_run.add_argument("--config", required=True)
    p_sweep = sub.add_parser("sweep", help="one run per epsilon plus a summary CSV")
    p_sweep.add_argument("--config", required=True)
    p_sweep.add_argument("--epsilons", required=True, type=_epsilons, help="comma-separated list")
    p_sweep.add_argument("--workers", type=int, default=None)
    p_verify = sub.add_parser("verify", help="run the oracle suite and print pass/fail per check")
    p_verify.add_argument("--config", required=True)
    return parser


def main(argv=None):
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    try:
        config = harness.parse_config(args.config)
    except (ParseError, ValidationError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return harness.EXIT_ERROR

    if args.command == "run":
        result = harness.run(config)
        if result.error:
            print(f"error: {result.error}", file=sys.stderr)
        else:
            print(f"{result.termination}: wrote {', '.join(result.paths.values())}")
        return result.exit_code

    if args.command == "sweep":
        rows = harness.sweep(config, args.epsilons, args.workers)
        for row in rows:
            print(
                f"eps={row['epsilon']:g} termination={row['termination']} "
                f"decay={row['decay_verdict']} sup_eE={row['sup_scaled_E']} {row['error']}".rstrip()
            )
        return harness.EXIT_COMPLETED

    checks = harness.verify(config)
    for check in checks:
        print(check.line())
    return harness.EXIT_COMPLETED if all(c.passed for c in checks) else harness.EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())

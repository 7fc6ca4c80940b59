"""Command line entry point: ``verify <scenario> [options]``."""

from __future__ import annotations

import argparse
import logging
import os
import sys
from pathlib import Path

from .checks import REGISTRY
from .report import FORMATS, emit_report, run_checks
from .scenario import ScenarioError, load_scenario

OUTDIR_ENV = "CONFSCHWARZ_OUTDIR"
EXIT_OK, EXIT_FAIL, EXIT_CONFIG = 0, 1, 2

log = logging.getLogger("confschwarz.verify")


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(
        prog="verify",
        description="Evaluate the checks of a scenario file and write a report.",
        epilog=f"Exit codes: 0 all checks pass, 1 a check failed, 2 configuration error. "
               f"Without --out, reports go to stdout unless ${OUTDIR_ENV} names a directory.",
    )
    p.add_argument("scenario", nargs="?", help="path to a scenario file")
    p.add_argument("--format", choices=FORMATS, default="text", help="report format")
    p.add_argument("--out", help="output path ('-' for stdout)")
    p.add_argument("--seed", type=int, help="override the scenario seed")
    p.add_argument("--order", type=int, help="override the jet order budget K")
    p.add_argument("--list-checks", action="store_true", help="print the check registry and exit")
    p.add_argument("-v", "--verbose", action="store_true", help="log progress to stderr")
    return p


def list_checks() -> str:
    width = max(len(n) for n in REGISTRY)
    lines = []
    for name in sorted(REGISTRY):
        spec = REGISTRY[name]
        extra = f" ({spec.dim_text})" if spec.dim_text else ""
        lines.append(f"{name:<{width}}  {spec.module:<12} tol {spec.tol:.0e}  "
                     f"{spec.invariant}{extra}")
    return "\n".join(lines) + "\n"


def _destination(args, scenario_path: str) -> str | None:
    if args.out:
        return args.out
    outdir = os.environ.get(OUTDIR_ENV)
    if outdir:
        ext = {"json": "json", "csv": "csv", "text": "txt"}[args.format]
        return str(Path(outdir) / f"{Path(scenario_path).stem}.{ext}")
    return None


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    if args.list_checks:
        sys.stdout.write(list_checks())
        return EXIT_OK
    if not args.scenario:
        print("verify: error: a scenario file is required", file=sys.stderr)
        return EXIT_CONFIG
    try:
        scenario = load_scenario(args.scenario, seed=args.seed, order=args.order)
    except ScenarioError as exc:
        print(f"verify: configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    log.info("loaded %s: %d checks, %d probes", scenario.name, len(scenario.checks),
             len(scenario.probes()))
    try:
        report = run_checks(scenario)
    except ScenarioError as exc:
        print(f"verify: configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    dest = _destination(args, args.scenario)
    try:
        text = emit_report(report, args.format, dest)
    except OSError as exc:
        print(f"verify: cannot write report: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    if dest in (None, "-"):
        sys.stdout.write(text)
    else:
        log.info("report written to %s", dest)
    return report.exit_code


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())

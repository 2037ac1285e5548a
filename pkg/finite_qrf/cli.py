import argparse
import logging
import sys
from logging import getLogger
from pathlib import Path
from typing import List, Optional, Sequence

from finite_qrf.checks import run_scenario, validate_checks
from finite_qrf.errors import QrfError
from finite_qrf.names import report_format_json, report_format_text, toolkit_version
from finite_qrf.options import DEFAULT_SEED, ToolkitOptions
from finite_qrf.report import Report, emit_report, emit_reports
from finite_qrf.scenario import Scenario, load_scenario

logger = getLogger("finite_qrf_cli")

corpus_directory = Path(__file__).parent / "corpus"

EXIT_PASS = 0
EXIT_FAIL = 1
EXIT_LOAD_ERROR = 2


def corpus_files(directory: Path = corpus_directory) -> List[Path]:
    """
    The bundled scenario files, sorted by name. Files in the broken/ subdirectory are not part of the corpus run.
    """
    return sorted(directory.glob("*.json"))


def build_parser() -> argparse.ArgumentParser:
    description = "Verify quantum reference frame identities declared in scenario files."
    parser = argparse.ArgumentParser(prog="finite-qrf", description=description)
    parser.add_argument("--version", action="version", version=f"%(prog)s {toolkit_version}")
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--tolerance", type=float, default=None,
                        help="Absolute tolerance, overrides the tolerance of the scenario file.")
    common.add_argument("--seed", type=int, default=DEFAULT_SEED, help="Seed for random check inputs.")
    common.add_argument("--report", type=Path, default=None, help="Write the report to this path instead of stdout.")
    common.add_argument("--format", choices=[report_format_json, report_format_text], default=report_format_json)
    common.add_argument("--jobs", type=int, default=1, help="Number of checks run in parallel.")
    common.add_argument("--timings", action="store_true", help="Include check runtimes in the report.")
    common.add_argument("--verbose", "-v", action="count", default=0, help="Log info (-v) or debug (-vv) messages.")
    verbs = parser.add_subparsers(dest="verb", required=True)
    check = verbs.add_parser("check", parents=[common], help="Run the checks of a scenario file.")
    check.add_argument("file", type=Path)
    validate = verbs.add_parser("validate", parents=[common], help="Load and validate a scenario file only.")
    validate.add_argument("file", type=Path)
    verbs.add_parser("corpus", parents=[common], help="Run every bundled scenario file.")
    return parser


def _options(args: argparse.Namespace, scenario: Scenario) -> ToolkitOptions:
    return ToolkitOptions(tolerance=args.tolerance if args.tolerance is not None else scenario.tolerance,
                          seed=args.seed, n_jobs=args.jobs, show_progress=args.verbose > 0 and args.jobs > 1,
                          include_timings=args.timings)


def _write(args: argparse.Namespace, payload: bytes):
    if args.report is None:
        sys.stdout.buffer.write(payload + b"\n")
        sys.stdout.flush()
    else:
        args.report.parent.mkdir(parents=True, exist_ok=True)
        args.report.write_bytes(payload)
        logger.info("Report written to %s.", args.report)


def _load(path: Path) -> Optional[Scenario]:
    try:
        scenario = load_scenario(path)
        validate_checks(scenario)
        return scenario
    except QrfError as error:
        logger.error("Cannot load %s: %s", path, error)
        return None


def _run_files(args: argparse.Namespace, paths: Sequence[Path]) -> int:
    reports: List[Report] = []
    for path in paths:
        scenario = _load(path)
        if scenario is None:
            return EXIT_LOAD_ERROR
        reports.append(run_scenario(scenario, _options(args, scenario)))
    if len(reports) == 1 and args.verb == "check":
        _write(args, emit_report(reports[0], args.format))
    else:
        _write(args, emit_reports(reports, args.format))
    return EXIT_PASS if all(report.ok for report in reports) else EXIT_FAIL


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    level = logging.WARNING if args.verbose == 0 else logging.INFO if args.verbose == 1 else logging.DEBUG
    logging.basicConfig(level=level, format="%(asctime)s %(name)s %(levelname)s %(message)s")
    if args.verb == "validate":
        scenario = _load(args.file)
        if scenario is None:
            return EXIT_LOAD_ERROR
        logger.info("%s: %d checks, digest %s.", scenario.name, len(scenario.checks), scenario.digest)
        return EXIT_PASS
    if args.verb == "check":
        return _run_files(args, [args.file])
    return _run_files(args, corpus_files())


if __name__ == "__main__":
    sys.exit(main())

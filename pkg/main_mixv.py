"""Main entry point for mixv - mixture equivalence and Ising reduction verifier.

Exit codes: 0 equal/success, 1 not equal, 2 input error, 3 numeric or guard failure.
Standard output carries exactly one JSON document; logs go to standard error.
"""
import argparse
import json
import logging
import sys
from typing import Dict, List, Optional

from config import Config, TOOL_VERSION
from commands import get_all_commands
from database import Database
from errors import InputError, MixvError, error_details
from run_report import RunReport

logger = logging.getLogger(__name__)


class ReportingArgumentParser(argparse.ArgumentParser):
    """Argument parser that raises usage errors so they can be reported as JSON."""

    def error(self, message):
        raise InputError(f"{self.prog}: {message}")


def build_parser(commands: Dict) -> argparse.ArgumentParser:
    parser = ReportingArgumentParser(
        prog="mixv",
        description="Exact equivalence checking for mixtures of products, and Ising reductions")
    parser.add_argument("--version", action="version", version=f"mixv {TOOL_VERSION}")
    parser.add_argument("--log-level", default=None, choices=["DEBUG", "INFO", "WARNING", "ERROR"],
                        help="overrides MIXV_LOG_LEVEL")
    parser.add_argument("--record", action="store_true",
                        help="store the run report in the run ledger (also MIXV_RECORD_RUNS=true)")
    parser.add_argument("--db", default=None, help="run ledger path (overrides MIXV_DATABASE_PATH)")
    parser.add_argument("--no-timing", action="store_true",
                        help="omit run id and timing fields from the report")
    subparsers = parser.add_subparsers(dest="command", required=True)
    for command in commands.values():
        command.configure_parser(subparsers)
    return parser


def configure_logging(level: Optional[str] = None):
    """Configure root logging on stderr (stdout is reserved for JSON)."""
    logging.basicConfig(
        level=getattr(logging, (level or Config.LOG_LEVEL), logging.INFO),
        format='%(asctime)s - %(name)s - %(levelname)s - %(message)s',
        stream=sys.stderr,
        force=True
    )


def emit(document: Dict):
    sys.stdout.write(json.dumps(document, indent=2, ensure_ascii=False))
    sys.stdout.write("\n")
    sys.stdout.flush()


def record(report: RunReport, db_path: Optional[str]):
    db = Database(db_path)
    try:
        db.record_run(report)
    finally:
        db.close()


def main(argv: Optional[List[str]] = None) -> int:
    """Main entry point."""
    argv = list(sys.argv[1:] if argv is None else argv)
    commands = get_all_commands()
    parser = build_parser(commands)
    try:
        args = parser.parse_args(argv)
    except InputError as e:
        configure_logging()
        logger.error(f"Usage error: {e}")
        emit({"error": error_details(e)})
        return e.exit_code
    except SystemExit as e:
        # --help and --version
        return int(e.code or 0)

    configure_logging(args.log_level)
    try:
        Config.validate()
    except ValueError as e:
        logger.error(f"Configuration error: {e}")
        emit({"error": {"kind": "config_error", "message": str(e)}})
        return 2

    command = commands[args.command]
    report = RunReport(["mixv"] + argv, command.input_paths(args), command.parameters(args))
    try:
        exit_code, result = command.execute(args)
        report.complete(result, exit_code)
    except MixvError as e:
        report.fail(e)
    except Exception as e:
        logger.exception(f"Unexpected failure in {args.command}")
        report.fail(e)

    if command.wraps_report:
        emit(report.to_dict(timing=not args.no_timing))
    elif report.error is not None:
        emit({"error": report.error})
    else:
        emit(report.result)

    if args.record or Config.RECORD_RUNS:
        try:
            record(report, args.db)
        except Exception as e:
            logger.warning(f"Could not record run: {e}")

    return report.exit_code


if __name__ == '__main__':
    sys.exit(main())

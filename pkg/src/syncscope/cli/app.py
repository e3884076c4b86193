"""Command-line entry point: `analyze`, `simulate` and `modes` on a JSON config.

Exit codes: 0 success, 1 error (including bad arguments), 2 not certified by the
criterion, 3 simulation diverged.
"""
import argparse
import logging
import sys
from pathlib import Path
from typing import Optional, Sequence

from ..errors import SyncscopeError
from ..settings import RuntimeSettings
from ..utils.logging_config import setup_logging
from .commands import COMMANDS, EXIT_ERROR
from .export import write_csv, write_json
from .parser import load_config

logger = logging.getLogger("syncscope")

class ArgumentParser(argparse.ArgumentParser):
    """argparse exits with 2 on bad arguments, which is taken by 'not certified'."""

    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_ERROR, f"{self.prog}: error: {message}\n")

def _positive_float(text: str) -> float:
    try:
        value = float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"{text!r} is not a number")
    if not value > 0:
        raise argparse.ArgumentTypeError(f"{text!r} must be positive")
    return value

def build_parser() -> ArgumentParser:
    common = ArgumentParser(add_help=False)
    common.add_argument("config", type=Path, help="JSON system description")
    common.add_argument("--out", type=Path, default=None, help="write the JSON report here instead of stdout")
    common.add_argument("--csv", action="store_true", help="also write CSV tables next to the report")
    common.add_argument("--verbose", action="store_true", help="debug logging")

    parser = ArgumentParser(prog="syncscope", description="Synchronization stability of power-communication networks")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=ArgumentParser)

    sub.add_parser("analyze", parents=[common], help="evaluate the small-gain stability criterion")
    sub.add_parser("modes", parents=[common], help="report the connectivity modes of K_H")
    simulate = sub.add_parser("simulate", parents=[common], help="simulate the nonlinear loop")
    simulate.add_argument("--gain-mode", choices=["dynamic", "quasistatic"], default=None)
    simulate.add_argument("--dt", type=_positive_float, default=None, help="integration step (s)")
    simulate.add_argument("--duration", type=_positive_float, default=None, help="horizon (s)")
    return parser

def _csv_path(args, suffix: str) -> Path:
    base = args.out if args.out is not None else args.config
    return base.with_name(f"{base.stem}_{suffix}.csv")

def main(argv: Optional[Sequence[str]] = None) -> int:
    try:
        args = build_parser().parse_args(argv)
    except SystemExit as e:
        return e.code if isinstance(e.code, int) else EXIT_ERROR
    settings = RuntimeSettings()
    setup_logging(logging.DEBUG if args.verbose else settings.log_level)

    options = {"csv": args.csv}
    if args.command == "analyze":
        options["threads"] = settings.threads
    elif args.command == "simulate":
        options.update(gain_mode=args.gain_mode, dt=args.dt, duration=args.duration)

    try:
        config = load_config(args.config)
        result = COMMANDS[args.command].execute(config, **options)
        write_json(result.payload, args.out)
        for suffix, (frame, header) in result.tables.items():
            write_csv(frame, _csv_path(args, suffix), header)
    except SyncscopeError as e:
        logger.error(f"{args.command} failed: {e}")
        return EXIT_ERROR
    except OSError as e:
        logger.error(f"{args.command} failed: {e}")
        return EXIT_ERROR
    except Exception as e:
        logger.exception(f"{args.command} failed unexpectedly: {e}")
        return EXIT_ERROR

    logger.info(f"{args.command} finished with exit code {result.exit_code}")
    return result.exit_code

import argparse
import asyncio
import json
import logging
import sys
from typing import List, Optional

from checker_engine import CheckerEngine, Report
from config_manager import ConfigManager
from errors import TraceCheckError
from report_view import render_error, render_report
from systems import Direction
from utils import parse_eps, parse_require

LOG_FORMAT = '%(asctime)s - %(name)s - %(levelname)s - %(message)s'


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", default="config.json", help="settings file (default: config.json)")
    common.add_argument("--pretty", action="store_true", help="also render the report on stderr")
    common.add_argument("--verbose", action="store_true", help="log at INFO level")

    parser = argparse.ArgumentParser(
        prog="tracecheck",
        description="Kleisli simulations, forward partial execution and infinite-trace oracles.",
    )
    commands = parser.add_subparsers(dest="command", required=True)

    validate = commands.add_parser("validate", parents=[common], help="check a system document")
    validate.add_argument("system")

    check = commands.add_parser("check-sim", parents=[common], help="check a simulation witness")
    check.add_argument("--dir", required=True, choices=[d.value for d in Direction])
    check.add_argument("--witness", required=True)
    check.add_argument("x")
    check.add_argument("y")

    find = commands.add_parser("find-sim", parents=[common], help="search a simulation (powerset)")
    find.add_argument("--dir", required=True, choices=[d.value for d in Direction])
    find.add_argument("--require", type=parse_require, default=frozenset(),
                      help="comma separated: total, image-finite")
    find.add_argument("--budget", type=int, help="largest relation count brute force may enumerate")
    find.add_argument("x")
    find.add_argument("y")

    fpe = commands.add_parser("fpe", parents=[common], help="forward partial execution")
    fpe.add_argument("system")
    fpe.add_argument("--output", help="write the transformed system here and print a report")

    trace = commands.add_parser("trace", parents=[common], help="depth-k trace semantics")
    trace.add_argument("system")
    trace.add_argument("--depth", type=int)
    trace.add_argument("--from", dest="start", help="start state (default: initial arrow)")
    trace.add_argument("--per-tree", action="store_true", help="subdist: per-tree probabilities")
    trace.add_argument("--eps", type=parse_eps)

    inclusion = commands.add_parser("inclusion", parents=[common], help="trace inclusion X ⊑ Y")
    inclusion.add_argument("x")
    inclusion.add_argument("y")
    inclusion.add_argument("--exact-word", action="store_true")
    inclusion.add_argument("--depth", type=int)
    inclusion.add_argument("--eps", type=parse_eps)

    return parser


def configure_logging(level: str, verbose: bool):
    logging.basicConfig(
        level=logging.INFO if verbose else getattr(logging, level, logging.WARNING),
        format=LOG_FORMAT,
        stream=sys.stderr,
        force=True,
    )


async def dispatch(args: argparse.Namespace, engine: CheckerEngine):
    if args.command == "validate":
        return await engine.validate(args.system)
    if args.command == "check-sim":
        return await engine.check_sim(Direction(args.dir), args.witness, args.x, args.y)
    if args.command == "find-sim":
        return await engine.find_sim(Direction(args.dir), args.x, args.y, args.require, args.budget)
    if args.command == "fpe":
        return await engine.fpe(args.system, args.output)
    if args.command == "trace":
        return await engine.trace(args.system, args.depth, args.start, args.per_tree, args.eps)
    return await engine.inclusion(args.x, args.y, args.exact_word, args.depth, args.eps)


def emit(report: Report):
    text = json.dumps(report.model_dump(exclude_none=True), indent=4, ensure_ascii=False)
    sys.stdout.write(text + "\n")
    sys.stdout.flush()


async def run_async(args: argparse.Namespace) -> int:
    pretty = args.pretty
    try:
        settings = await ConfigManager(args.config).get_settings()
        configure_logging(settings.app_settings.log_level, args.verbose)
        pretty = pretty or settings.app_settings.pretty

        if getattr(args, "depth", None) is not None and args.depth < 0:
            raise ValueError("--depth must be non-negative")

        result = await dispatch(args, CheckerEngine(settings.checker_settings))
    except (TraceCheckError, OSError, ValueError) as e:
        message = f"{type(e).__name__}: {e}"
        logging.getLogger("CheckerEngine").debug(message)
        if pretty:
            render_error(message)
        else:
            sys.stderr.write(message + "\n")
        return 2

    if isinstance(result, bytes):
        sys.stdout.write(result.decode("utf-8"))
        sys.stdout.flush()
        return 0

    emit(result)
    if pretty:
        render_report(result)
    return result.exit_code


def run(argv: Optional[List[str]] = None) -> int:
    """Parse argv, run one command, return the exit code (0 ok, 1 refuted, 2 error)."""
    try:
        args = build_parser().parse_args(argv)
    except SystemExit as e:
        return e.code if isinstance(e.code, int) else 2
    return asyncio.run(run_async(args))


if __name__ == "__main__":
    sys.exit(run())

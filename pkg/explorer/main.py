"""Command-line entry point: `peacock-explore <command> [options]`."""
import argparse
import sys
from typing import List, Optional

from loguru import logger

from explorer import __version__
from explorer.commands import register_commands
from explorer.core.config import settings
from explorer.core.exceptions import ExplorerError
from explorer.core.logging import configure_logging

EXIT_USAGE = 2


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="peacock-explore",
        description="Peacock-trajectory exploration of box worlds with a simulated quadrotor",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    parser.add_argument(
        "--log-level",
        default=settings.LOG_LEVEL,
        choices=["TRACE", "DEBUG", "INFO", "WARNING", "ERROR"],
        type=str.upper,
    )
    parser.add_argument("--log-json", action="store_true", help="Serialize log records as JSON")
    subparsers = parser.add_subparsers(dest="command", required=True)
    register_commands(subparsers)
    return parser


def main(argv: Optional[List[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    configure_logging(args.log_level, args.log_json)
    try:
        return int(args.func(args))
    except (ExplorerError, OSError) as exc:
        logger.error(f"{args.command} failed: {exc}")
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())

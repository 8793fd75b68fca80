# Copyright 2026 lbd-changepoint contributors
# Licensed under the Apache License, Version 2.0

"""The ``lbd`` command line entry point."""

import argparse
import sys

from colcon_core.command import add_subparsers
from colcon_core.command import CommandContext
from colcon_core.logging import colcon_logger
from colcon_core.logging import get_numeric_log_level
from colcon_core.logging import set_logger_level_from_env
from lbd_changepoint import __version__
from lbd_changepoint.subverb import EXIT_INVALID_CONFIGURATION
from lbd_changepoint.subverb import get_subverb_extensions
from lbd_changepoint.subverb import LOG_LEVEL_ENVIRONMENT_VARIABLE


class LbdArgumentParser(argparse.ArgumentParser):
    """Argument parser reporting usage errors as invalid configuration."""

    def error(self, message):  # noqa: D102
        self.print_usage(sys.stderr)
        self.exit(EXIT_INVALID_CONFIGURATION, f"{self.prog}: error: {message}\n")


def create_parser(subverb_extensions=None):
    parser = LbdArgumentParser(
        prog="lbd",
        description="Changepoint detection with simultaneous confidence "
        "intervals on a sparse grid of Bonferroni triplets.",
    )
    parser.add_argument(
        "--version", action="version", version=f"%(prog)s {__version__}")
    parser.add_argument(
        "--log-level", type=get_numeric_log_level, default=None,
        metavar="LOG_LEVEL",
        help="Set log level for the console output, either by numeric or "
        "string value (default: warning)")
    if subverb_extensions is None:
        subverb_extensions = get_subverb_extensions()
    add_subparsers(parser, "lbd", subverb_extensions, attribute="subverb_name")
    return parser


def main(argv=None, *, subverb_extensions=None):
    """
    Run ``lbd``.

    :param argv: arguments without the program name, ``sys.argv[1:]`` if None
    :returns: the exit code
    """
    set_logger_level_from_env(colcon_logger, LOG_LEVEL_ENVIRONMENT_VARIABLE.name)
    parser = create_parser(subverb_extensions)
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return e.code
    if args.log_level is not None:
        colcon_logger.setLevel(args.log_level)

    if args.subverb_name is None:
        parser.print_usage(sys.stderr)
        print("lbd: error: no subcommand given", file=sys.stderr)
        return EXIT_INVALID_CONFIGURATION

    context = CommandContext(command_name="lbd", args=args)
    rc = args.main(context=context)
    return rc or 0


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())

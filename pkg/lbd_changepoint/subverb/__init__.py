# Copyright 2026 lbd-changepoint contributors
# Licensed under the Apache License, Version 2.0

import argparse
import functools
import json
import os
import sys

from colcon_core.environment_variable import EnvironmentVariable
from colcon_core.logging import colcon_logger
from colcon_core.plugin_system import instantiate_extensions
from colcon_core.plugin_system import order_extensions_by_name
from lbd_changepoint.exceptions import InvalidArgumentError
from lbd_changepoint.exceptions import InvalidDataError
from lbd_changepoint.exceptions import LbdError
from lbd_changepoint.local_tests import GAUSSIAN_KNOWN
from lbd_changepoint.local_tests import TestModel
from lbd_changepoint.local_tests import WILCOXON
from lbd_changepoint.local_tests import WILCOXON_BOUND
from lbd_changepoint.local_tests import WILCOXON_EXACT
from lbd_changepoint.verb import red

logger = colcon_logger.getChild(__name__)

EXIT_FAILURE = 1
EXIT_INVALID_DATA = 2
EXIT_INVALID_CONFIGURATION = 3

"""Environment variable for the default number of worker threads"""
THREADS_ENVIRONMENT_VARIABLE = EnvironmentVariable(
    "LBD_THREADS", "Set the default number of worker threads of lbd")

"""Environment variable to set the log level of lbd"""
LOG_LEVEL_ENVIRONMENT_VARIABLE = EnvironmentVariable(
    "LBD_LOG_LEVEL", "Set the log level of lbd (debug|10, info|20, warn|30, "
    "error|40, critical|50, or any other positive numeric value)")


class LbdSubverbExtensionPoint:
    """
    The interface for lbd subverb extensions.

    A subverb extension provides a subcommand to the ``lbd`` command and to
    the ``colcon lbd`` verb.
    For each instance the attribute `SUBVERB_NAME` is being set to the basename
    of the entry point registering the extension.
    """

    """The version of the lbd subverb extension interface."""
    EXTENSION_POINT_VERSION = "1.0"

    def add_arguments(self, *, parser):
        """
        Add command line arguments specific to the subverb.

        The method is intended to be overridden in a subclass.

        :param parser: The argument parser
        """
        pass

    def main(self, *, context):
        """
        Execute the subverb extension logic.

        This method must be overridden in a subclass.

        :param context: The context providing the parsed command line arguments
        :returns: The return code
        """
        raise NotImplementedError()


def get_subverb_extensions():
    """
    Get the available subverb extensions.

    The extensions are ordered by their entry point name.

    :rtype: OrderedDict
    """
    extensions = instantiate_extensions(__name__)
    for name, extension in extensions.items():
        extension.SUBVERB_NAME = name
    return order_extensions_by_name(extensions)


def exit_code(exception):
    if isinstance(exception, (InvalidDataError, OSError)):
        return EXIT_INVALID_DATA
    if isinstance(exception, InvalidArgumentError):
        return EXIT_INVALID_CONFIGURATION
    return EXIT_FAILURE


def report_errors(main):
    """
    Turn library errors raised by a subverb into exit codes.

    The message goes to stderr, prefixed by the subverb name.
    """
    @functools.wraps(main)
    def wrapper(self, *, context):
        try:
            return main(self, context=context)
        except (LbdError, OSError) as e:
            name = getattr(self, "SUBVERB_NAME", type(self).__name__)
            red(f"lbd {name}: error: {e}", file=sys.stderr)
            logger.debug("subverb '%s' failed", name, exc_info=True)
            return exit_code(e)
    return wrapper


def resolve_threads(value):
    """Number of worker threads from ``--threads`` or ``LBD_THREADS``."""
    source = "--threads"
    if value is None:
        value = os.environ.get(THREADS_ENVIRONMENT_VARIABLE.name)
        source = THREADS_ENVIRONMENT_VARIABLE.name
        if not value:
            return None
    try:
        threads = int(value)
    except ValueError:
        raise InvalidArgumentError(
            f"{source} must be a positive integer, got '{value}'"
        ) from None
    if threads < 1:
        raise InvalidArgumentError(f"{source} must be >= 1, got {threads}")
    return threads


def probability(text):
    """Argparse type for a number in (0, 1)."""
    value = float(text)
    if not 0.0 < value < 1.0:
        raise argparse.ArgumentTypeError(f"must lie in (0, 1), got {text}")
    return value


def positive_int(text):
    value = int(text)
    if value < 1:
        raise argparse.ArgumentTypeError(f"must be a positive integer, got {text}")
    return value


def add_output_argument(parser, default="json"):
    parser.add_argument(
        "--output", choices=("json", "text"), default=default,
        help=f"Output format (default: {default})",
    )


def add_threads_argument(parser):
    parser.add_argument(
        "--threads", type=positive_int, default=None,
        help=f"Cap on worker threads (default: ${THREADS_ENVIRONMENT_VARIABLE.name} "
        "or 1)",
    )


def build_model(kind, sigma=None, wilcoxon_exact=False):
    """The :class:`TestModel` selected on the command line."""
    if sigma is not None and kind != GAUSSIAN_KNOWN:
        logger.warning("--sigma is only used by the %s model", GAUSSIAN_KNOWN)
        sigma = None
    if wilcoxon_exact and kind != WILCOXON:
        logger.warning("--wilcoxon-exact is only used by the %s model", WILCOXON)
    mode = WILCOXON_EXACT if wilcoxon_exact and kind == WILCOXON else WILCOXON_BOUND
    return TestModel(kind, sigma=sigma, wilcoxon_mode=mode)


def emit_json(document, file=None):
    print(json.dumps(document, indent=2, sort_keys=True), file=file or sys.stdout)

# Copyright 2026 lbd-changepoint contributors
# Licensed under the Apache License, Version 2.0

import sys

from colcon_core.command import add_subparsers
from colcon_core.plugin_system import satisfies_version
from colcon_core.verb import VerbExtensionPoint
from lbd_changepoint.subverb import EXIT_INVALID_CONFIGURATION
from lbd_changepoint.subverb import get_subverb_extensions
from lbd_changepoint.verb import red


class LbdVerb(VerbExtensionPoint):
    """Detect changepoints with simultaneous confidence intervals."""

    def __init__(self):  # noqa: D107
        super().__init__()
        satisfies_version(VerbExtensionPoint.EXTENSION_POINT_VERSION, "^1.0")
        self._parser = None

    def add_arguments(self, *, parser):  # noqa: D102
        self._parser = parser
        add_subparsers(
            parser, "colcon lbd", get_subverb_extensions(),
            attribute="subverb_name",
        )

    def main(self, *, context):  # noqa: D102
        # a selected subverb replaces this method through the parser defaults
        print(self._parser.format_usage(), end="", file=sys.stderr)
        red("colcon lbd: error: no subverb given", file=sys.stderr)
        return EXIT_INVALID_CONFIGURATION

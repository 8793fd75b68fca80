# Copyright 2026 lbd-changepoint contributors
# Licensed under the Apache License, Version 2.0

from colcon_core.plugin_system import satisfies_version
from lbd_changepoint import __version__
from lbd_changepoint.subverb import LbdSubverbExtensionPoint


class VersionSubverb(LbdSubverbExtensionPoint):
    """Report version of the tool."""

    def __init__(self):  # noqa: D107
        super().__init__()
        satisfies_version(LbdSubverbExtensionPoint.EXTENSION_POINT_VERSION, "^1.0")

    def main(self, *, context):  # noqa: D102
        print(__version__)
        return 0

# Copyright 2026 lbd-changepoint contributors
# Licensed under the Apache License, Version 2.0

import json
import sys

from colcon_core.plugin_system import satisfies_version
from lbd_changepoint.detector import SCHEMA_VERSION
from lbd_changepoint.exceptions import InvalidDataError
from lbd_changepoint.interval_algebra import minimal_and_disjoint
from lbd_changepoint.subverb import emit_json
from lbd_changepoint.subverb import LbdSubverbExtensionPoint
from lbd_changepoint.subverb import report_errors


def read_intervals(source):
    """
    Parse a JSON list of ``[lo, hi]`` pairs or ``{"lo": .., "hi": ..}`` objects.

    :param source: the JSON text itself, a file path, or ``-`` for stdin
    """
    if source == "-":
        text = sys.stdin.read()
    elif source.lstrip().startswith("["):
        text = source
    else:
        with open(source, encoding="utf-8") as handle:
            text = handle.read()
    try:
        items = json.loads(text)
    except json.JSONDecodeError as e:
        raise InvalidDataError(f"intervals are not valid JSON: {e}") from None
    if not isinstance(items, list):
        raise InvalidDataError("expected a JSON list of intervals")
    pairs = []
    for position, item in enumerate(items):
        if isinstance(item, dict):
            item = [item.get("lo"), item.get("hi")]
        if (
            not isinstance(item, list) or len(item) != 2
            or not all(isinstance(v, int) and not isinstance(v, bool) for v in item)
        ):
            raise InvalidDataError(
                f"entry {position} is not a pair of integers: {item!r}",
                index=position,
            )
        pairs.append(tuple(item))
    return pairs


class IntervalsSubverb(LbdSubverbExtensionPoint):
    """Minimal intervals and a largest disjoint subset of a list of intervals."""

    def __init__(self):  # noqa: D107
        super().__init__()
        satisfies_version(LbdSubverbExtensionPoint.EXTENSION_POINT_VERSION, "^1.0")

    def add_arguments(self, *, parser):  # noqa: D102
        parser.add_argument(
            "--input", required=True,
            help="JSON list of [lo, hi] pairs, a file holding one, or - for stdin")

    @report_errors
    def main(self, *, context):  # noqa: D102
        minimal, disjoint, count = minimal_and_disjoint(
            read_intervals(context.args.input))
        emit_json({
            "schema_version": SCHEMA_VERSION,
            "minimal": [interval.as_list() for interval in minimal],
            "disjoint": [interval.as_list() for interval in disjoint],
            "n_lower_bound": count,
        })
        return 0

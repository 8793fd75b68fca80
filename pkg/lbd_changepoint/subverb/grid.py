# Copyright 2026 lbd-changepoint contributors
# Licensed under the Apache License, Version 2.0

from colcon_core.plugin_system import satisfies_version
from lbd_changepoint.subverb import add_output_argument
from lbd_changepoint.subverb import emit_json
from lbd_changepoint.subverb import LbdSubverbExtensionPoint
from lbd_changepoint.subverb import positive_int
from lbd_changepoint.subverb import report_errors
from lbd_changepoint.triplet_grid import count_bound
from lbd_changepoint.triplet_grid import get_grid
from lbd_changepoint.triplet_grid import length_bound
from lbd_changepoint.verb import green
from lbd_changepoint.verb import red


def grid_summary(n, with_levels=False):
    """Counts of the Bonferroni grid of ``n`` and their theoretical bounds."""
    grid = get_grid(n)
    summary = {
        "n": grid.n,
        "levels": len(grid.levels),
        "first_block_end": grid.first_block_end,
        "max_block": grid.max_block,
        "lengths": len(grid.lengths),
        "length_bound": length_bound(grid.n),
        "intervals": grid.interval_count(),
        "triplets": grid.count,
        "triplet_bound": count_bound(grid.n),
        "block_sizes": list(grid.block_sizes),
    }
    summary["within_bound"] = summary["triplets"] <= summary["triplet_bound"]
    if with_levels:
        summary["per_level"] = grid.level_statistics()
    return summary


class GridSubverb(LbdSubverbExtensionPoint):
    """Inspect the Bonferroni triplet grid of a series length."""

    def __init__(self):  # noqa: D107
        super().__init__()
        satisfies_version(LbdSubverbExtensionPoint.EXTENSION_POINT_VERSION, "^1.0")

    def add_arguments(self, *, parser):  # noqa: D102
        parser.add_argument(
            "--n", type=positive_int, required=True, help="Series length")
        parser.add_argument(
            "--stats", action="store_true",
            help="Include per-level and per-block counts")
        add_output_argument(parser)

    @report_errors
    def main(self, *, context):  # noqa: D102
        args = context.args
        summary = grid_summary(args.n, with_levels=args.stats)
        if args.output == "json":
            emit_json(summary)
            return 0

        print(f"n = {summary['n']}: {summary['levels']} levels, "
              f"{summary['max_block']} blocks, {summary['lengths']} lengths, "
              f"{summary['intervals']} intervals")
        if args.stats:
            print("level  spacing  block  lengths  intervals  triplets")
            for row in summary["per_level"]:
                print(f"{row['level']:>5}  {row['spacing']:>7}  {row['block']:>5}  "
                      f"{row['lengths']:>7}  {row['intervals']:>9}  "
                      f"{row['triplets']:>8}")
            for block, size in enumerate(summary["block_sizes"], start=1):
                print(f"block {block}: {size} triplets")
        line = (f"{summary['triplets']} triplets, bound "
                f"{summary['triplet_bound']:.0f}")
        if summary["within_bound"]:
            green(line)
        else:
            red(line)
        return 0

# Copyright 2026 lbd-changepoint contributors
# Licensed under the Apache License, Version 2.0

from colcon_core.plugin_system import satisfies_version
from lbd_changepoint.diagnostics import ChangepointGeometry
from lbd_changepoint.diagnostics import DEFAULT_SLACK
from lbd_changepoint.diagnostics import plan
from lbd_changepoint.subverb import add_output_argument
from lbd_changepoint.subverb import emit_json
from lbd_changepoint.subverb import LbdSubverbExtensionPoint
from lbd_changepoint.subverb import positive_int
from lbd_changepoint.subverb import report_errors
from lbd_changepoint.verb import green
from lbd_changepoint.verb import yellow


class PlanSubverb(LbdSubverbExtensionPoint):
    """Check whether a changepoint is detectable and how well it is localized."""

    def __init__(self):  # noqa: D107
        super().__init__()
        satisfies_version(LbdSubverbExtensionPoint.EXTENSION_POINT_VERSION, "^1.0")

    def add_arguments(self, *, parser):  # noqa: D102
        parser.add_argument("--n", type=positive_int, required=True,
                            help="Series length")
        parser.add_argument("--jump", type=float, required=True,
                            help="Jump of the mean at the changepoint")
        parser.add_argument("--dleft", type=positive_int, required=True,
                            help="Distance to the previous changepoint")
        parser.add_argument("--dright", type=positive_int, required=True,
                            help="Distance to the next changepoint")
        parser.add_argument("--m", type=positive_int, default=1,
                            help="Number of changepoints targeted (default: 1)")
        parser.add_argument("--b", type=float, default=DEFAULT_SLACK,
                            help=f"Slack term b_n (default: {DEFAULT_SLACK})")
        add_output_argument(parser, default="text")

    @report_errors
    def main(self, *, context):  # noqa: D102
        args = context.args
        geometry = ChangepointGeometry(
            args.jump, args.dleft, args.dright, args.n, args.m, args.b)
        report = plan(geometry)
        if args.output == "json":
            emit_json(report)
            return 0

        print(f"energy               {report['energy']:.4f}")
        print(f"detection threshold  {report['detection_threshold']:.4f}")
        print(f"count threshold      {report['count_threshold']:.4f}")
        if "normalized_energy" in report:
            print(f"normalized energy    {report['normalized_energy']:.4f} "
                  f"(critical constant {report['critical_constant']:.4f})")
        if report["detectable"]:
            green("detectable")
        else:
            yellow("not detectable")
        if report["precision_bound"] is not None:
            print(f"precision bound      {report['precision_bound']:.4f}")
        else:
            yellow(report["precision_note"])
        return 0

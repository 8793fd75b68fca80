# Copyright 2026 lbd-changepoint contributors
# Licensed under the Apache License, Version 2.0

from colcon_core.plugin_system import satisfies_version
from lbd_changepoint.detector import DEFAULT_ALPHA
from lbd_changepoint.detector import detect
from lbd_changepoint.exceptions import InvalidDataError
from lbd_changepoint.local_tests import MODEL_KINDS
from lbd_changepoint.series_io import load_series
from lbd_changepoint.series_io import write_plot_data
from lbd_changepoint.subverb import add_output_argument
from lbd_changepoint.subverb import add_threads_argument
from lbd_changepoint.subverb import build_model
from lbd_changepoint.subverb import emit_json
from lbd_changepoint.subverb import LbdSubverbExtensionPoint
from lbd_changepoint.subverb import probability
from lbd_changepoint.subverb import report_errors
from lbd_changepoint.subverb import resolve_threads
from lbd_changepoint.verb import gray
from lbd_changepoint.verb import green
from lbd_changepoint.verb import yellow


class DetectSubverb(LbdSubverbExtensionPoint):
    """Detect changepoints in a series read from a CSV file."""

    def __init__(self):  # noqa: D107
        super().__init__()
        satisfies_version(LbdSubverbExtensionPoint.EXTENSION_POINT_VERSION, "^1.0")

    def add_arguments(self, *, parser):  # noqa: D102
        parser.add_argument(
            "--input", required=True, help="CSV file, one value per row")
        parser.add_argument(
            "--column", default=None,
            help="Column to read, 0-based position or header name "
            "(default: the first)")
        parser.add_argument(
            "--model", required=True, choices=MODEL_KINDS,
            help="Distributional model of the local tests")
        parser.add_argument(
            "--sigma", type=float, default=None,
            help="Noise standard deviation of the gaussian-known model")
        parser.add_argument(
            "--alpha", type=probability, default=DEFAULT_ALPHA,
            help=f"Simultaneous significance level (default: {DEFAULT_ALPHA})")
        parser.add_argument(
            "--wilcoxon-exact", action="store_true",
            help="Exact rank-sum quantiles where tractable")
        parser.add_argument(
            "--max-len-exp", type=float, default=1.0, metavar="P",
            help="Only scan windows of length <= n**P (default: 1)")
        add_output_argument(parser)
        parser.add_argument(
            "--emit-plot-data", default=None, metavar="TSV_PATH",
            help="Write the series and the minimal intervals as TSV")
        add_threads_argument(parser)

    @report_errors
    def main(self, *, context):  # noqa: D102
        args = context.args
        model = build_model(args.model, args.sigma, args.wilcoxon_exact)
        threads = resolve_threads(args.threads)
        series = load_series(args.input, args.column)
        try:
            result = detect(
                series.values, model, args.alpha,
                max_length_exponent=args.max_len_exp, threads=threads,
            )
        except InvalidDataError as e:
            if e.index is None:
                raise
            raise InvalidDataError(
                f"row {series.row_of(e.index)}: {e}", index=e.index
            ) from None

        if args.emit_plot_data:
            write_plot_data(args.emit_plot_data, series.values, result.minimal)

        document = result.to_dict()
        document["config"].update({"input": args.input, "column": series.column})
        if args.output == "json":
            emit_json(document)
            return 0

        config = document["config"]
        gray(
            f"n = {config['n']}, model {config['model']}, alpha = {config['alpha']}, "
            f"{config['evaluated_triplets']} triplets evaluated"
        )
        if not result.detections:
            yellow("no changepoint detected")
            return 0
        print(f"{len(result.detections)} significant intervals")
        print("minimal intervals:")
        for interval in result.minimal:
            print(f"  [{interval.lo}, {interval.hi}]")
        print("disjoint intervals:")
        for interval in result.disjoint:
            print(f"  [{interval.lo}, {interval.hi}]")
        green(
            f"at least {result.lower_bound} changepoints "
            f"with confidence {1 - config['alpha']:g}"
        )
        return 0

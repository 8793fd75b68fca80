# Copyright 2026 lbd-changepoint contributors
# Licensed under the Apache License, Version 2.0

from colcon_core.plugin_system import satisfies_version
from lbd_changepoint.detector import DEFAULT_ALPHA
from lbd_changepoint.exceptions import InvalidArgumentError
from lbd_changepoint.local_tests import GAUSSIAN_KNOWN
from lbd_changepoint.local_tests import GAUSSIAN_UNKNOWN
from lbd_changepoint.local_tests import WILCOXON
from lbd_changepoint.signals_sim import BUILTIN_SIGNALS
from lbd_changepoint.signals_sim import builtin_signal
from lbd_changepoint.signals_sim import coverage_experiment
from lbd_changepoint.signals_sim import hard_instance
from lbd_changepoint.signals_sim import hard_instance_targets
from lbd_changepoint.subverb import add_threads_argument
from lbd_changepoint.subverb import build_model
from lbd_changepoint.subverb import emit_json
from lbd_changepoint.subverb import LbdSubverbExtensionPoint
from lbd_changepoint.subverb import positive_int
from lbd_changepoint.subverb import probability
from lbd_changepoint.subverb import report_errors
from lbd_changepoint.subverb import resolve_threads
from lbd_changepoint.verb import gray
from lbd_changepoint.verb import green
from lbd_changepoint.verb import red

# noise is Gaussian, so only models valid for real-valued data
SIMULATION_MODELS = (GAUSSIAN_KNOWN, GAUSSIAN_UNKNOWN, WILCOXON)


class SimulateSubverb(LbdSubverbExtensionPoint):
    """Monte Carlo coverage of the confidence intervals on benchmark signals."""

    def __init__(self):  # noqa: D107
        super().__init__()
        satisfies_version(LbdSubverbExtensionPoint.EXTENSION_POINT_VERSION, "^1.0")

    def add_arguments(self, *, parser):  # noqa: D102
        parser.add_argument(
            "--signal", choices=sorted(BUILTIN_SIGNALS), default=None,
            help="Builtin benchmark signal")
        parser.add_argument(
            "--hard-instance", action="store_true",
            help="Use the alternating tent signal built from --n, --m and --eps")
        parser.add_argument("--n", type=positive_int, default=None,
                            help="Length of the hard instance")
        parser.add_argument("--m", type=positive_int, default=None,
                            help="Number of tents of the hard instance")
        parser.add_argument("--eps", type=float, default=None,
                            help="Gap epsilon in (0, 4) of the hard instance")
        parser.add_argument(
            "--model", choices=SIMULATION_MODELS, default=GAUSSIAN_KNOWN,
            help=f"Model of the local tests (default: {GAUSSIAN_KNOWN}, "
            "with the signal's sigma)")
        parser.add_argument(
            "--alpha", type=probability, default=DEFAULT_ALPHA,
            help=f"Simultaneous significance level (default: {DEFAULT_ALPHA})")
        parser.add_argument("--nsim", type=positive_int, default=10000,
                            help="Number of replicates (default: 10000)")
        parser.add_argument("--seed", type=int, default=0,
                            help="Experiment seed (default: 0)")
        parser.add_argument(
            "--first-replicate", type=int, default=0,
            help="Index of the first replicate, to split runs (default: 0)")
        parser.add_argument(
            "--max-len-exp", type=float, default=1.0, metavar="P",
            help="Only scan windows of length <= n**P (default: 1)")
        add_threads_argument(parser)
        parser.add_argument("--json", action="store_true",
                            help="Print the report as JSON")

    def _signal(self, args):
        if args.hard_instance == (args.signal is not None):
            raise InvalidArgumentError(
                "pass exactly one of --signal and --hard-instance")
        if args.signal is not None:
            return builtin_signal(args.signal), None
        if None in (args.n, args.m, args.eps):
            raise InvalidArgumentError("--hard-instance needs --n, --m and --eps")
        return (
            hard_instance(args.n, args.m, args.eps),
            hard_instance_targets(args.n, args.m),
        )

    @report_errors
    def main(self, *, context):  # noqa: D102
        args = context.args
        spec, targets = self._signal(args)
        sigma = spec.sigma if args.model == GAUSSIAN_KNOWN else None
        model = build_model(args.model, sigma)
        report = coverage_experiment(
            spec, model, args.alpha, args.nsim, args.seed,
            first_replicate=args.first_replicate,
            threads=resolve_threads(args.threads),
            max_length_exponent=args.max_len_exp,
        )
        document = report.to_dict()
        if targets is not None:
            document["targets"] = list(targets)
        if args.json:
            emit_json(document)
            return 0

        gray(f"{spec.name}: n = {spec.length}, K = {report.changepoints}, "
             f"n_sim = {report.n_sim}, seed = {report.seed}")
        print(f"mean N        {report.mean_lower_bound:.3f}")
        print("N - K         " + "  ".join(
            f"{bucket}:{share:.3f}"
            for bucket, share in report.hist_n_minus_k.items()))
        print(f"mode N - K    {report.mode_bucket()}")
        floor = 1.0 - args.alpha
        for label, share in (("p1_hat", report.p1_hat), ("p2_hat", report.p2_hat)):
            line = f"{label:<13} {share:.3f}"
            tolerance = 3.0 * report.standard_error(floor)
            if share >= floor - tolerance:
                green(line)
            else:
                red(line)
        return 0

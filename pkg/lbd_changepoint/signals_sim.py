# Copyright 2026 lbd-changepoint contributors
# Licensed under the Apache License, Version 2.0

"""
Benchmark signals, seeded noise and the coverage experiment.

Randomness
----------
Replicate ``i`` of an experiment with seed ``seed`` draws its noise from
``numpy.random.Generator(numpy.random.Philox(SeedSequence(seed,
spawn_key=(i,))))``. Replicates are therefore independent of the order and
the process in which they run, and a run over replicates ``[0, a)`` merged
with a run over ``[a, a + b)`` equals one run over ``[0, a + b)``.
"""

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from dataclasses import field
import math

from colcon_core.logging import colcon_logger
from lbd_changepoint.detector import DEFAULT_ALPHA
from lbd_changepoint.detector import LbdDetector
from lbd_changepoint.detector import SCHEMA_VERSION
from lbd_changepoint.exceptions import InvalidArgumentError
from lbd_changepoint.interval_algebra import minimal_and_disjoint
from lbd_changepoint.local_tests import TestModel
import numpy as np

logger = colcon_logger.getChild(__name__)

GENERATOR = "numpy.random.Philox(SeedSequence(seed, spawn_key=(replicate,)))"

# buckets of N - K, matching the coverage table layout
HISTOGRAM_BUCKETS = ("<=-5", "-4", "-3", "-2", "-1", "0", "1", ">=2")


@dataclass(frozen=True)
class SignalSpec:
    """
    A piecewise constant mean with Gaussian noise.

    Changepoint ``tau`` means that positions ``tau`` and ``tau + 1``
    (1-based) lie in different segments.
    """

    name: str
    length: int
    changepoints: tuple
    values: tuple
    sigma: float

    def __post_init__(self):  # noqa: D105
        cps = self.changepoints
        if len(self.values) != len(cps) + 1:
            raise InvalidArgumentError(
                f"signal '{self.name}': {len(cps)} changepoints need "
                f"{len(cps) + 1} values, got {len(self.values)}"
            )
        if any(not 0 < tau < self.length for tau in cps):
            raise InvalidArgumentError(
                f"signal '{self.name}': changepoints must lie in (0, {self.length})"
            )
        if any(b <= a for a, b in zip(cps, cps[1:])):
            raise InvalidArgumentError(
                f"signal '{self.name}': changepoints must be strictly increasing"
            )
        if any(a == b for a, b in zip(self.values, self.values[1:])):
            raise InvalidArgumentError(
                f"signal '{self.name}': adjacent segment values must differ"
            )
        if not self.sigma >= 0:
            raise InvalidArgumentError(
                f"signal '{self.name}': sigma must be >= 0, got {self.sigma}"
            )

    def as_dict(self):
        return {
            "name": self.name,
            "length": self.length,
            "changepoints": list(self.changepoints),
            "values": list(self.values),
            "sigma": self.sigma,
        }


def _equally_spaced(start, stop, step):
    return tuple(range(start, stop, step))


BUILTIN_SIGNALS = {
    "null1000": SignalSpec("null1000", 1000, (), (0.0,), 1.0),
    "null2000": SignalSpec("null2000", 2000, (), (0.0,), 1.0),
    "null3000": SignalSpec("null3000", 3000, (), (0.0,), 1.0),
    "blocks": SignalSpec(
        "blocks", 2048,
        (205, 267, 308, 472, 512, 820, 902, 1332, 1557, 1598, 1659),
        (0.0, 14.64, -3.66, 7.32, -7.32, 10.98, -4.39, 3.29, 19.03, 7.68,
         15.37, 0.0),
        10.0,
    ),
    "fms": SignalSpec(
        "fms", 497,
        (139, 226, 243, 300, 309, 333),
        (-0.18, 0.08, 1.07, -0.53, 0.16, -0.69, -0.16),
        0.3,
    ),
    # listed with the same parameters as fms; see mix_wbs
    "mix": SignalSpec(
        "mix", 497,
        (139, 226, 243, 300, 309, 333),
        (-0.18, 0.08, 1.07, -0.53, 0.16, -0.69, -0.16),
        0.3,
    ),
    "mix_wbs": SignalSpec(
        "mix_wbs", 560,
        (11, 21, 41, 61, 91, 121, 161, 201, 251, 301, 361, 421, 491),
        (7.0, -7.0, 6.0, -6.0, 5.0, -5.0, 4.0, -4.0, 3.0, -3.0, 2.0, -2.0,
         1.0, -1.0),
        4.0,
    ),
    "teeth10": SignalSpec(
        "teeth10", 140,
        _equally_spaced(11, 132, 10),
        tuple(float(i % 2) for i in range(14)),
        0.4,
    ),
    "stairs10": SignalSpec(
        "stairs10", 150,
        _equally_spaced(11, 142, 10),
        tuple(float(i) for i in range(1, 16)),
        0.3,
    ),
}


def builtin_signal(name):
    try:
        return BUILTIN_SIGNALS[name]
    except KeyError:
        raise InvalidArgumentError(
            f"unknown signal '{name}', expected one of "
            f"{', '.join(sorted(BUILTIN_SIGNALS))}"
        ) from None


def changepoint_count(spec):
    return len(spec.changepoints)


def mean_vector(spec):
    """The mean ``mu`` of ``spec`` as a float64 array of length ``n``."""
    bounds = np.diff(np.asarray((0,) + tuple(spec.changepoints) + (spec.length,)))
    return np.repeat(np.asarray(spec.values, dtype=np.float64), bounds)


def hard_instance(n, m, epsilon):
    """
    Alternating tents that are barely undetectable simultaneously.

    With ``delta = n // (4 m)`` and
    ``h = (4 - epsilon) / (2 sqrt(delta)) * sqrt(log(n / delta))`` the mean
    is ``-h`` on ``(t_i - delta, t_i]`` and ``+h`` on ``(t_i, t_i + delta]``
    around the targets ``t_i = (2 i - 1) delta``, ``i = 1..m``, and 0 after.
    Every target has both neighbouring changepoints at distance ``delta``.
    """
    n, m = int(n), int(m)
    if m < 1 or 4 * m > n:
        raise InvalidArgumentError(f"need 1 <= m <= n / 4, got n = {n}, m = {m}")
    if not 0.0 < epsilon < 4.0:
        raise InvalidArgumentError(f"epsilon must lie in (0, 4), got {epsilon}")
    delta = n // (4 * m)
    height = (4.0 - epsilon) / (2.0 * math.sqrt(delta)) * math.sqrt(math.log(n / delta))
    changepoints = [j * delta for j in range(1, 2 * m)]
    values = [-height if j % 2 == 0 else height for j in range(2 * m)]
    if 2 * m * delta < n:
        changepoints.append(2 * m * delta)
        values.append(0.0)
    return SignalSpec(
        f"hard-n{n}-m{m}", n, tuple(changepoints), tuple(values), 1.0
    )


def hard_instance_targets(n, m):
    delta = n // (4 * m)
    return tuple((2 * i - 1) * delta for i in range(1, m + 1))


def replicate_seed(seed, replicate):
    """The :class:`numpy.random.SeedSequence` of one replicate."""
    if int(seed) < 0 or int(replicate) < 0:
        raise InvalidArgumentError("seed and replicate index must be >= 0")
    return np.random.SeedSequence(int(seed), spawn_key=(int(replicate),))


def replicate_generator(seed, replicate):
    return np.random.Generator(np.random.Philox(replicate_seed(seed, replicate)))


def simulate(spec, seed, replicate=0):
    """
    ``Y = mu + sigma * Z`` with ``Z`` standard normal from the replicate's
    generator; equal arguments give bit-identical series.
    """
    noise = replicate_generator(seed, replicate).standard_normal(spec.length)
    return mean_vector(spec) + spec.sigma * noise


def _bucket(difference):
    if difference <= -5:
        return 0
    if difference >= 2:
        return len(HISTOGRAM_BUCKETS) - 1
    return difference + 5


@dataclass(frozen=True)
class CoverageReport:
    """
    Counters of a coverage experiment over replicates
    ``[first_replicate, first_replicate + n_sim)``.
    """

    signal: str
    changepoints: int
    alpha: float
    model: dict
    seed: int
    first_replicate: int
    n_sim: int
    covered: int
    bounded: int
    any_detection: int
    sum_lower_bound: int
    histogram: tuple = field(default=(0,) * len(HISTOGRAM_BUCKETS))

    @property
    def p1_hat(self):
        """Share of replicates in which every reported interval holds a changepoint."""
        return self.covered / self.n_sim

    @property
    def p2_hat(self):
        """Share of replicates with ``N(alpha) <= K``."""
        return self.bounded / self.n_sim

    @property
    def mean_lower_bound(self):
        return self.sum_lower_bound / self.n_sim

    @property
    def detection_rate(self):
        return self.any_detection / self.n_sim

    @property
    def hist_n_minus_k(self):
        return {
            bucket: count / self.n_sim
            for bucket, count in zip(HISTOGRAM_BUCKETS, self.histogram)
        }

    def mode_bucket(self):
        return HISTOGRAM_BUCKETS[int(np.argmax(self.histogram))]

    def standard_error(self, p):
        """Binomial Monte Carlo standard error of a share ``p``."""
        return math.sqrt(p * (1.0 - p) / self.n_sim)

    def to_dict(self):
        return {
            "schema_version": SCHEMA_VERSION,
            "signal": self.signal,
            "K": self.changepoints,
            "alpha": self.alpha,
            "model": dict(self.model),
            "seed": self.seed,
            "generator": GENERATOR,
            "first_replicate": self.first_replicate,
            "n_sim": self.n_sim,
            "p1_hat": self.p1_hat,
            "p2_hat": self.p2_hat,
            "mean_N": self.mean_lower_bound,
            "detection_rate": self.detection_rate,
            "hist_N_minus_K": self.hist_n_minus_k,
        }


def merge_reports(first, second):
    """
    Combine two reports over adjacent replicate ranges of one experiment.

    :raises InvalidArgumentError: if the experiments differ or the ranges
      are not adjacent
    """
    first, second = sorted((first, second), key=lambda r: r.first_replicate)
    same = (
        first.signal == second.signal
        and first.changepoints == second.changepoints
        and first.alpha == second.alpha
        and first.model == second.model
        and first.seed == second.seed
    )
    if not same:
        raise InvalidArgumentError("reports belong to different experiments")
    if first.first_replicate + first.n_sim != second.first_replicate:
        raise InvalidArgumentError(
            f"replicate ranges are not adjacent: [{first.first_replicate}, "
            f"{first.first_replicate + first.n_sim}) and "
            f"[{second.first_replicate}, {second.first_replicate + second.n_sim})"
        )
    return CoverageReport(
        first.signal, first.changepoints, first.alpha, dict(first.model),
        first.seed, first.first_replicate, first.n_sim + second.n_sim,
        first.covered + second.covered,
        first.bounded + second.bounded,
        first.any_detection + second.any_detection,
        first.sum_lower_bound + second.sum_lower_bound,
        tuple(a + b for a, b in zip(first.histogram, second.histogram)),
    )


def _all_covered(changepoints, lo, hi):
    if not len(lo):
        return True
    if not len(changepoints):
        return False
    # first changepoint >= lo must also be <= hi
    index = np.searchsorted(changepoints, lo, side="left")
    inside = index < len(changepoints)
    first = changepoints[np.minimum(index, len(changepoints) - 1)]
    return bool(np.all(inside & (first <= hi)))


def coverage_experiment(
    spec, model=None, alpha=DEFAULT_ALPHA, n_sim=1000, seed=0, *,
    first_replicate=0, threads=None, max_length_exponent=1.0,
):
    """
    Run the detector on ``n_sim`` noisy copies of ``spec``.

    :param model: defaults to the Gaussian model with the signal's sigma
    :rtype: :class:`CoverageReport`
    """
    if int(n_sim) < 1:
        raise InvalidArgumentError(f"n_sim must be >= 1, got {n_sim}")
    if model is None:
        model = TestModel.gaussian_known(spec.sigma)
    detector = LbdDetector(
        spec.length, model, alpha, max_length_exponent=max_length_exponent
    )
    changepoints = np.asarray(spec.changepoints, dtype=np.int64)
    k = len(changepoints)

    def replicate(i):
        hits = detector.significant(simulate(spec, seed, i))
        _, _, count = minimal_and_disjoint(zip(hits.lo.tolist(), hits.hi.tolist()))
        return _all_covered(changepoints, hits.lo, hits.hi), count, len(hits) > 0

    indices = range(int(first_replicate), int(first_replicate) + int(n_sim))
    if threads is not None and threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as executor:
            outcomes = list(executor.map(replicate, indices))
    else:
        outcomes = [replicate(i) for i in indices]

    histogram = [0] * len(HISTOGRAM_BUCKETS)
    for _, count, _ in outcomes:
        histogram[_bucket(count - k)] += 1
    report = CoverageReport(
        spec.name, k, detector.alpha, model.describe(), int(seed),
        int(first_replicate), int(n_sim),
        covered=sum(1 for covered, _, _ in outcomes if covered),
        bounded=sum(1 for _, count, _ in outcomes if count <= k),
        any_detection=sum(1 for _, _, found in outcomes if found),
        sum_lower_bound=sum(count for _, count, _ in outcomes),
        histogram=tuple(histogram),
    )
    logger.debug(
        "coverage %s: n_sim=%d p1=%.4f p2=%.4f mean N=%.3f",
        spec.name, report.n_sim, report.p1_hat, report.p2_hat,
        report.mean_lower_bound,
    )
    return report

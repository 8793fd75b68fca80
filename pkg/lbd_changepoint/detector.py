# Copyright 2026 lbd-changepoint contributors
# Licensed under the Apache License, Version 2.0

"""
The Bonferroni triplet scan.

:class:`LbdDetector` binds a series length, a model and a level. It works
out the calibrated per-triplet levels and critical values once per
triplet family, so repeated scans (Monte Carlo replicates) only evaluate
statistics.
"""

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from dataclasses import field
import math
import time

from colcon_core.logging import colcon_logger
from lbd_changepoint.calibration import calibrate
from lbd_changepoint.exceptions import InvalidArgumentError
from lbd_changepoint.exceptions import InvalidDataError
from lbd_changepoint.interval_algebra import ClosedInterval
from lbd_changepoint.interval_algebra import minimal_and_disjoint
from lbd_changepoint.local_tests import critical_values_batch
from lbd_changepoint.local_tests import EXACT_WILCOXON_LIMIT
from lbd_changepoint.local_tests import GAUSSIAN_KNOWN
from lbd_changepoint.local_tests import GAUSSIAN_UNKNOWN
from lbd_changepoint.local_tests import needs_second_moments
from lbd_changepoint.local_tests import PrefixSums
from lbd_changepoint.local_tests import segment_statistics
from lbd_changepoint.local_tests import TestModel
from lbd_changepoint.local_tests import validate_series
from lbd_changepoint.local_tests import WILCOXON
from lbd_changepoint.local_tests import WILCOXON_BOUND
from lbd_changepoint.local_tests import WILCOXON_EXACT
from lbd_changepoint.local_tests import wilcoxon_batch
from lbd_changepoint.triplet_grid import BATCH_SIZE
from lbd_changepoint.triplet_grid import get_grid
from lbd_changepoint.triplet_grid import RIGHT
from lbd_changepoint.triplet_grid import Triplet
from lbd_changepoint.triplet_grid import TripletBatch
import numpy as np

logger = colcon_logger.getChild(__name__)

SCHEMA_VERSION = 1
DEFAULT_ALPHA = 0.1


def span_cap(n, max_length_exponent):
    """Largest window ``e - s`` allowed by the cap ``n ** p``."""
    p = float(max_length_exponent)
    if not 0.0 < p <= 1.0:
        raise InvalidArgumentError(
            f"the interval length exponent must lie in (0, 1], got {p}"
        )
    if p == 1.0:
        return n
    # absorb rounding of exact powers such as 10000 ** 0.5
    return int(math.floor(n ** p + 1e-9))


def max_interval_cap(grid, max_length_exponent, min_inner=1):
    """
    Triplets of ``grid`` whose window ``e - s`` is at most ``n ** p``.

    :param grid: a :class:`~lbd_changepoint.triplet_grid.TripletGrid`
    :param float max_length_exponent: ``p`` in (0, 1]
    :param int min_inner: shortest Bonferroni interval the model can use
    :rtype: :class:`~lbd_changepoint.triplet_grid.TripletSelection`
    """
    return grid.select(
        max_span=span_cap(grid.n, max_length_exponent), min_inner=min_inner
    )


@dataclass(frozen=True)
class Detection:
    """A significant triplet and its confidence interval ``[s + 1, e - 1]``."""

    interval_lo: int
    interval_hi: int
    triplet: Triplet
    stat: float
    threshold: float
    alpha_t: float

    @property
    def interval(self):
        return ClosedInterval(self.interval_lo, self.interval_hi)

    def as_dict(self):
        return {
            "lo": self.interval_lo,
            "hi": self.interval_hi,
            "s": self.triplet.s,
            "m": self.triplet.m,
            "e": self.triplet.e,
            "stat": self.stat,
            "threshold": self.threshold,
            "alpha_t": self.alpha_t,
        }


@dataclass(frozen=True)
class DetectionResult:
    """
    The confidence collection and its derived views.

    ``detections`` is ordered by increasing ``interval_hi``, then decreasing
    ``interval_lo``, then ``m``.
    """

    detections: tuple
    minimal: tuple
    disjoint: tuple
    lower_bound: int
    config: dict = field(default_factory=dict)

    def intervals(self):
        return [detection.interval for detection in self.detections]

    def to_dict(self):
        return {
            "schema_version": SCHEMA_VERSION,
            "config": dict(self.config),
            "detections": [detection.as_dict() for detection in self.detections],
            "minimal": [interval.as_list() for interval in self.minimal],
            "disjoint": [interval.as_list() for interval in self.disjoint],
            "n_lower_bound": self.lower_bound,
        }


@dataclass(frozen=True)
class ScanHits:
    """Significant triplets of one scan as column arrays, in canonical order."""

    batch: TripletBatch
    stat: np.ndarray
    threshold: np.ndarray
    alpha_t: np.ndarray

    def __len__(self):
        return len(self.batch)

    @property
    def lo(self):
        return self.batch.s + 1

    @property
    def hi(self):
        return self.batch.e - 1

    def detections(self):
        return tuple(
            Detection(
                int(self.batch.s[i]) + 1, int(self.batch.e[i]) - 1,
                self.batch.triplet(i), float(self.stat[i]),
                float(self.threshold[i]), float(self.alpha_t[i]),
            )
            for i in range(len(self))
        )


def _chunks(counts, batch_size):
    """Split group indices into runs holding about ``batch_size`` triplets."""
    chunk, total = [], 0
    for index, count in enumerate(counts):
        chunk.append(index)
        total += count
        if total >= batch_size:
            yield chunk
            chunk, total = [], 0
    if chunk:
        yield chunk


class LbdDetector:
    """
    Scanner for series of one length under one model and level.

    Each triplet family is an arithmetic progression along its lattice, so
    the scan reads strided views of the prefix sums family by family and
    builds index arrays for the significant members only.

    :param int n: series length, at least 8
    :param model: a :class:`~lbd_changepoint.local_tests.TestModel`
    :param float alpha: simultaneous level in (0, 1)
    :param float max_length_exponent: only windows with ``e - s <= n ** p``
      are evaluated
    :param int exact_limit: largest ``k (N - k) N`` for exact Wilcoxon
      quantiles
    """

    def __init__(  # noqa: D107
        self, n, model, alpha=DEFAULT_ALPHA, *, max_length_exponent=1.0,
        exact_limit=EXACT_WILCOXON_LIMIT, batch_size=BATCH_SIZE,
    ):
        if not isinstance(model, TestModel):
            raise InvalidArgumentError(f"expected a TestModel, got {model!r}")
        self.grid = get_grid(n)
        self.n = self.grid.n
        self.model = model
        self.max_length_exponent = float(max_length_exponent)
        self.max_span = span_cap(self.n, self.max_length_exponent)
        # the level budget covers every triplet, evaluated or not
        self.calibration = calibrate(alpha, self.grid.block_sizes)
        self.alpha = self.calibration.alpha
        self.exact_limit = exact_limit

        self.selection = max_interval_cap(
            self.grid, self.max_length_exponent, model.min_inner_length
        )
        self.families = self.selection.families
        self.evaluated = len(self.selection)
        self._groups = self.selection.groups()
        self._moments = 2 if needs_second_moments(model) else 1
        self._alpha_t, self._threshold, self._fallback = self._family_thresholds()
        self._chunks = list(_chunks([group.count for group in self._groups], batch_size))
        logger.debug(
            "detector n=%d model=%s alpha=%g: %d of %d triplets in %d families, "
            "%d groups, %d chunks, max span %d",
            self.n, model.kind, self.alpha, self.evaluated, self.grid.count,
            len(self.families), len(self._groups), len(self._chunks), self.max_span,
        )

    def _family_thresholds(self):
        families = self.families
        blocks = np.asarray([f.block for f in families], dtype=np.int64)
        alpha_t = self.calibration.levels_for(blocks)
        # one representative window per family: s = 0, m = k, e = span
        k = np.asarray(
            [f.inner if f.side == RIGHT else f.extension for f in families],
            dtype=np.int64,
        )
        span = np.asarray([f.span for f in families], dtype=np.int64)
        zero = np.zeros(len(families), dtype=np.int64)
        threshold = critical_values_batch(
            self.model, alpha_t, zero, k, span, exact_limit=self.exact_limit
        )
        fallback = None
        if self.model.kind == WILCOXON and self.model.wilcoxon_mode == WILCOXON_EXACT:
            fallback = critical_values_batch(
                TestModel.wilcoxon(WILCOXON_BOUND), alpha_t, zero, k, span
            )
        return alpha_t, threshold, fallback

    def _hits(self, position, family, index, stat, threshold):
        return (
            family.batch(index), stat, threshold,
            np.full(len(index), self._alpha_t[position]),
        )

    def _scan_group(self, group, prefix):
        head = group.head
        spacing, inner = head.spacing, head.inner
        bonferroni = prefix.strided_segments(
            0, inner, spacing, group.anchor_count, self._moments
        )
        hits = []
        for position, family in zip(group.positions, group.families):
            count, first = family.count, family.first_anchor
            if family.side == RIGHT:
                left = bonferroni.take(0, count)
                right = prefix.strided_segments(
                    inner, family.extension, spacing, count, self._moments
                )
            else:
                left = prefix.strided_segments(
                    first - family.extension, family.extension, spacing, count,
                    self._moments,
                )
                right = bonferroni.take(first // spacing, count)
            stat = segment_statistics(self.model, left, right)
            threshold = self._threshold[position]
            if not stat.max() > threshold:
                continue
            index = np.flatnonzero(stat > threshold)
            hits.append(self._hits(
                position, family, index, stat[index], np.full(len(index), threshold)
            ))
        return hits, 0

    def _scan_ranked_group(self, group, y):
        hits, tie_fallbacks = [], 0
        for position, family in zip(group.positions, group.families):
            stat, tied = wilcoxon_batch(y, *family.arrays())
            threshold = np.full(len(stat), self._threshold[position])
            if self._fallback is not None and tied.any():
                threshold[tied] = self._fallback[position]
                tie_fallbacks += int(tied.sum())
            index = np.flatnonzero(stat > threshold)
            if len(index):
                hits.append(self._hits(
                    position, family, index, stat[index], threshold[index]
                ))
        return hits, tie_fallbacks

    def _scan_chunk(self, chunk, y, prefix):
        hits, tie_fallbacks = [], 0
        for index in chunk:
            if self.model.kind == WILCOXON:
                group_hits, ties = self._scan_ranked_group(self._groups[index], y)
            else:
                group_hits, ties = self._scan_group(self._groups[index], prefix)
            hits.extend(group_hits)
            tie_fallbacks += ties
        return (
            TripletBatch.concatenate([hit[0] for hit in hits]),
            _concatenate([hit[1] for hit in hits]),
            _concatenate([hit[2] for hit in hits]),
            _concatenate([hit[3] for hit in hits]),
            tie_fallbacks,
        )

    def significant(self, y, threads=None):
        """
        Evaluate every selected triplet on ``y``.

        :param y: series of length ``n``, valid for the model
        :param int threads: worker threads; ``None`` or 1 scans inline
        :rtype: :class:`ScanHits`
        """
        y = validate_series(y, self.model)
        if len(y) != self.n:
            raise InvalidDataError(
                f"detector built for n = {self.n}, got a series of length {len(y)}"
            )
        prefix = PrefixSums.from_series(
            y, center=self.model.kind in (GAUSSIAN_KNOWN, GAUSSIAN_UNKNOWN)
        )
        start = time.monotonic()
        if threads is not None and threads > 1 and len(self._chunks) > 1:
            with ThreadPoolExecutor(max_workers=threads) as executor:
                parts = list(executor.map(
                    lambda chunk: self._scan_chunk(chunk, y, prefix), self._chunks
                ))
        else:
            parts = [self._scan_chunk(chunk, y, prefix) for chunk in self._chunks]

        tie_fallbacks = sum(part[4] for part in parts)
        if tie_fallbacks:
            logger.info(
                "ties in %d windows: exact Wilcoxon quantiles replaced by the bound",
                tie_fallbacks,
            )
        batch = TripletBatch.concatenate([part[0] for part in parts])
        stat = _concatenate([part[1] for part in parts])
        threshold = _concatenate([part[2] for part in parts])
        alpha_t = _concatenate([part[3] for part in parts])

        order = np.lexsort((batch.m, -batch.s, batch.e))
        logger.debug(
            "scanned %d triplets in %.3fs, %d significant",
            self.evaluated, time.monotonic() - start, len(order),
        )
        return ScanHits(batch.select(order), stat[order], threshold[order], alpha_t[order])

    def config(self):
        config = dict(self.model.describe())
        config.update({
            "alpha": self.alpha,
            "n": self.n,
            "max_length_exponent": self.max_length_exponent,
            "max_span": self.max_span,
            "triplets": self.grid.count,
            "evaluated_triplets": self.evaluated,
            "max_block": self.grid.max_block,
            "levels": len(self.grid.levels),
        })
        return config

    def scan(self, y, threads=None):
        """Run the scan and assemble the :class:`DetectionResult`."""
        hits = self.significant(y, threads=threads)
        detections = hits.detections()
        minimal, disjoint, count = minimal_and_disjoint(
            detection.interval for detection in detections
        )
        return DetectionResult(
            detections, tuple(minimal), tuple(disjoint), count, self.config()
        )


def _concatenate(arrays):
    if not arrays:
        return np.zeros(0, dtype=np.float64)
    return np.concatenate(arrays)


def detect(
    y, model, alpha=DEFAULT_ALPHA, *, max_length_exponent=1.0, threads=None,
    exact_limit=EXACT_WILCOXON_LIMIT,
):
    """
    Detect changepoints in ``y`` with simultaneous confidence ``1 - alpha``.

    Every reported interval ``[s + 1, e - 1]`` contains a changepoint with
    probability at least ``1 - alpha``, simultaneously over all of them.

    :raises InvalidDataError: when ``y`` does not fit the model
    :raises InvalidArgumentError: for ``n < 8`` or an invalid ``alpha``
    :rtype: :class:`DetectionResult`
    """
    y = validate_series(y, model)
    detector = LbdDetector(
        len(y), model, alpha,
        max_length_exponent=max_length_exponent, exact_limit=exact_limit,
    )
    return detector.scan(y, threads=threads)

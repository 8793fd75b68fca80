# Copyright 2026 lbd-changepoint contributors
# Licensed under the Apache License, Version 2.0

"""
Local two-sample statistics ``T_t(Y)`` and their critical values.

Every statistic compares the segments ``(s, m]`` and ``(m, e]`` of a triplet.
The ``*_batch`` functions evaluate many triplets at once from column arrays
``s``, ``m``, ``e``; the scalar functions are thin wrappers around them so
both paths agree exactly.
"""

from dataclasses import dataclass
from functools import lru_cache
import math

from colcon_core.logging import colcon_logger
from lbd_changepoint.exceptions import InvalidArgumentError
from lbd_changepoint.exceptions import InvalidDataError
from lbd_changepoint.exceptions import InvalidTripletError
import numpy as np
from scipy import special
from scipy import stats

logger = colcon_logger.getChild(__name__)

GAUSSIAN_KNOWN = "gaussian-known"
GAUSSIAN_UNKNOWN = "gaussian-unknown"
POISSON = "poisson"
EXPONENTIAL = "exponential"
WILCOXON = "wilcoxon"
MODEL_KINDS = (GAUSSIAN_KNOWN, GAUSSIAN_UNKNOWN, POISSON, EXPONENTIAL, WILCOXON)

WILCOXON_EXACT = "exact"
WILCOXON_BOUND = "bound"

# exact rank-sum quantiles only when (m - s) * (e - m) * (e - s) stays below
EXACT_WILCOXON_LIMIT = 2_000_000

# per unit of window length; larger negative radicands indicate a bug
RADICAND_TOLERANCE = 1e-9
INTEGRALITY_TOLERANCE = 1e-9

EXP_FAMILY_CONSTANT = 4.0 + 2.0 * math.e


@dataclass(frozen=True)
class TestModel:
    """
    Distributional model selecting the statistic and its critical values.

    :param kind: one of :data:`MODEL_KINDS`
    :param sigma: noise standard deviation, only for ``gaussian-known``
    :param wilcoxon_mode: ``bound`` or ``exact``, only for ``wilcoxon``
    """

    __test__ = False

    kind: str
    sigma: float = None
    wilcoxon_mode: str = WILCOXON_BOUND

    def __post_init__(self):  # noqa: D105
        if self.kind not in MODEL_KINDS:
            raise InvalidArgumentError(
                f"unknown model '{self.kind}', expected one of {', '.join(MODEL_KINDS)}"
            )
        if self.kind == GAUSSIAN_KNOWN:
            if self.sigma is None or not math.isfinite(self.sigma) or self.sigma <= 0:
                raise InvalidArgumentError(
                    f"model {GAUSSIAN_KNOWN} needs a positive sigma, got {self.sigma!r}"
                )
        if self.wilcoxon_mode not in (WILCOXON_EXACT, WILCOXON_BOUND):
            raise InvalidArgumentError(
                f"wilcoxon mode must be '{WILCOXON_EXACT}' or '{WILCOXON_BOUND}'"
            )

    @classmethod
    def gaussian_known(cls, sigma):
        return cls(GAUSSIAN_KNOWN, sigma=float(sigma))

    @classmethod
    def gaussian_unknown(cls):
        return cls(GAUSSIAN_UNKNOWN)

    @classmethod
    def poisson(cls):
        return cls(POISSON)

    @classmethod
    def exponential(cls):
        return cls(EXPONENTIAL)

    @classmethod
    def wilcoxon(cls, mode=WILCOXON_BOUND):
        return cls(WILCOXON, wilcoxon_mode=mode)

    @property
    def min_inner_length(self):
        """Smallest Bonferroni interval usable with this model."""
        # the pooled variance needs at least four observations
        return 2 if self.kind == GAUSSIAN_UNKNOWN else 1

    def describe(self):
        description = {"model": self.kind}
        if self.kind == GAUSSIAN_KNOWN:
            description["sigma"] = self.sigma
        if self.kind == WILCOXON:
            description["wilcoxon_mode"] = self.wilcoxon_mode
        return description


@dataclass(frozen=True)
class Segments:
    """
    Means of segments of the series, all of one ``length`` or of per-segment lengths.

    ``square_sum``, ``constant`` and ``first`` (sum of squared values,
    whether the segment is flat, its first value) are only filled in when
    second moments are requested.
    """

    length: object
    mean: np.ndarray
    square_sum: np.ndarray = None
    constant: np.ndarray = None
    first: np.ndarray = None

    def take(self, start, count):
        """The ``count`` segments from position ``start`` on."""
        part = slice(start, start + count)
        return Segments(self.length, *(
            None if column is None else column[part]
            for column in (self.mean, self.square_sum, self.constant, self.first)
        ))


@dataclass(frozen=True)
class PrefixSums:
    """
    Cumulative sums of ``Y - shift`` and ``(Y - shift)**2``, both starting with a 0.

    ``values`` keeps the series itself and ``steps[i]`` counts the positions
    ``0 < j < i`` with ``Y[j] != Y[j - 1]``. A nonzero ``shift`` only suits
    the location invariant Gaussian statistics.
    """

    cum: np.ndarray
    cum_sq: np.ndarray
    values: np.ndarray
    steps: np.ndarray
    shift: float = 0.0

    @classmethod
    def from_series(cls, y, center=False):
        """
        Build the sums of ``y``.

        :param bool center: subtract the series mean first, so that data
          sitting on a large offset keep their precision
        """
        y = np.asarray(y, dtype=np.float64)
        shift = float(np.mean(y)) if center and len(y) else 0.0
        centered = y - shift if shift else y
        zero = np.zeros(1, dtype=np.float64)
        steps = np.concatenate((
            np.zeros(min(len(y), 1) + 1, dtype=np.int64),
            np.cumsum(y[1:] != y[:-1], dtype=np.int64),
        ))
        return cls(
            np.concatenate((zero, np.cumsum(centered))),
            np.concatenate((zero, np.cumsum(centered * centered))),
            y,
            steps,
            shift,
        )

    @property
    def n(self):
        return len(self.cum) - 1

    def _segments(self, lo, lo_next, hi, length, moments):
        mean = self.cum[hi] - self.cum[lo]
        mean /= length
        if moments == 1:
            return Segments(length, mean)
        return Segments(
            length, mean,
            self.cum_sq[hi] - self.cum_sq[lo],
            self.steps[hi] == self.steps[lo_next],
            self.values[lo],
        )

    def segments(self, a, b, moments=1):
        """The segments ``(a, b]`` for index arrays ``a < b``."""
        return self._segments(a, a + 1, b, b - a, moments)

    def strided_segments(self, start, length, step, count, moments=1):
        """
        The ``count`` segments ``(start + j step, start + j step + length]``.

        Reads strided views of the sums, so no index arrays are built.
        """
        stop = start + step * (count - 1) + 1
        return self._segments(
            slice(start, stop, step), slice(start + 1, stop + 1, step),
            slice(start + length, stop + length, step), length, moments,
        )


@dataclass(frozen=True)
class StatValue:
    """A statistic compared with its critical value."""

    value: float
    threshold: float

    @property
    def significant(self):
        return self.value > self.threshold


def _columns(t):
    return (
        np.asarray([t.s], dtype=np.int64),
        np.asarray([t.m], dtype=np.int64),
        np.asarray([t.e], dtype=np.int64),
    )


def _check_triplet(t, n):
    if not 0 <= t.s < t.m < t.e <= n:
        raise InvalidTripletError(
            f"triplet ({t.s}, {t.m}, {t.e}) is not valid for a series of length {n}"
        )


def _clamp_radicand(radicand, span):
    floor = -RADICAND_TOLERANCE * np.maximum(span, 1)
    if np.any(radicand < floor):
        raise FloatingPointError(
            "log likelihood ratio radicand is negative beyond rounding error"
        )
    return np.sqrt(np.maximum(radicand, 0.0))


def _z_values(left, right, sigma):
    k1, k2 = left.length, right.length
    value = np.subtract(left.mean, right.mean)
    np.abs(value, out=value)
    value *= np.sqrt(k1 * k2 / (k1 + k2)) / sigma
    return value


def _t_values(left, right):
    k1, k2 = left.length, right.length
    span = k1 + k2
    within = (left.square_sum - k1 * left.mean ** 2) + (right.square_sum - k2 * right.mean ** 2)
    pooled = np.maximum(within, 0.0) / (span - 2)
    degenerate = left.constant & right.constant
    with np.errstate(divide="ignore", invalid="ignore"):
        value = np.abs(left.mean - right.mean) / np.sqrt(pooled) * np.sqrt(k1 * k2 / span)
    # 0 / 0 from rounding in a window that is not flat
    value[np.isnan(value)] = 0.0
    if np.any(degenerate):
        equal = left.first == right.first
        value = np.where(degenerate, np.where(equal, 0.0, np.inf), value)
    return value


def _poisson_values(left, right):
    k1, k2 = left.length, right.length
    pooled = (k1 * left.mean + k2 * right.mean) / (k1 + k2)
    safe = np.where(pooled > 0, pooled, 1.0)
    radicand = 2.0 * (
        k1 * special.xlogy(left.mean, left.mean / safe)
        + k2 * special.xlogy(right.mean, right.mean / safe)
    )
    return _clamp_radicand(radicand, k1 + k2)


def _exponential_values(left, right):
    k1, k2 = left.length, right.length
    pooled = (k1 * left.mean + k2 * right.mean) / (k1 + k2)
    radicand = 2.0 * (k1 * np.log(pooled / left.mean) + k2 * np.log(pooled / right.mean))
    return _clamp_radicand(radicand, k1 + k2)


def needs_second_moments(model):
    return model.kind == GAUSSIAN_UNKNOWN


def segment_statistics(model, left, right):
    """
    Statistics of the triplets whose segments are ``left`` and ``right``.

    Not for the Wilcoxon model, which needs the ranks of every window.

    :param left: :class:`Segments` of ``(s, m]``
    :param right: :class:`Segments` of ``(m, e]``
    """
    if model.kind == GAUSSIAN_KNOWN:
        return _z_values(left, right, model.sigma)
    if model.kind == GAUSSIAN_UNKNOWN:
        return _t_values(left, right)
    if model.kind == POISSON:
        return _poisson_values(left, right)
    if model.kind == EXPONENTIAL:
        return _exponential_values(left, right)
    raise InvalidArgumentError(f"model {model.kind} has no segment statistic")


def _split(prefix, s, m, e, moments=1):
    return prefix.segments(s, m, moments), prefix.segments(m, e, moments)


def gaussian_z_batch(prefix, s, m, e, sigma):
    """Two-sample z-statistic with known noise level ``sigma``."""
    return _z_values(*_split(prefix, s, m, e), sigma)


def gaussian_t_batch(prefix, s, m, e):
    """
    Two-sample t-statistic with the pooled variance on ``e - s - 2`` df.

    Two constant segments yield 0 for equal levels and ``inf`` otherwise.
    """
    return _t_values(*_split(prefix, s, m, e, moments=2))


def poisson_batch(prefix, s, m, e):
    """Square root of twice the Poisson log likelihood ratio."""
    return _poisson_values(*_split(prefix, s, m, e))


def exponential_batch(prefix, s, m, e):
    """Square root of twice the exponential log likelihood ratio."""
    return _exponential_values(*_split(prefix, s, m, e))


def _rank_sum_statistic(k, span, deviation):
    """Standardised rank-sum statistic from ``|2 W - k (N + 1)|``."""
    return np.sqrt(12.0 * k) / (span + 1.0) * deviation / (2.0 * k)


def wilcoxon_batch(y, s, m, e):
    """
    Local Wilcoxon rank-sum statistics.

    Ranks are midranks of ``Y`` inside each window ``(s, e]``; every window
    is ranked once for all split points it carries.

    :returns: tuple ``(values, tied)`` where ``tied`` flags windows with ties
    """
    y = np.asarray(y, dtype=np.float64)
    values = np.zeros(len(s), dtype=np.float64)
    tied = np.zeros(len(s), dtype=bool)
    if not len(s):
        return values, tied
    order = np.lexsort((m, e, s))
    s_sorted, e_sorted = s[order], e[order]
    boundaries = np.flatnonzero(
        (np.diff(s_sorted) != 0) | (np.diff(e_sorted) != 0)
    ) + 1
    for group in np.split(order, boundaries):
        start, stop = int(s[group[0]]), int(e[group[0]])
        window = y[start:stop]
        ranks = stats.rankdata(window)
        rank_cum = np.concatenate(([0.0], np.cumsum(ranks)))
        k = m[group] - start
        span = stop - start
        deviation = np.abs(2.0 * rank_cum[k] - k * (span + 1.0))
        values[group] = _rank_sum_statistic(k, span, deviation)
        tied[group] = len(np.unique(window)) < span
    return values, tied


def gaussian_z(prefix, t, sigma):
    """Local two-sample z-statistic of one triplet."""
    if sigma <= 0:
        raise InvalidArgumentError(f"sigma must be positive, got {sigma}")
    _check_triplet(t, prefix.n)
    return float(gaussian_z_batch(prefix, *_columns(t), sigma)[0])


def gaussian_t(prefix, t):
    """Local two-sample t-statistic of one triplet."""
    _check_triplet(t, prefix.n)
    if t.e - t.s < 4:
        raise InvalidTripletError(
            f"the t-statistic needs e - s >= 4, got triplet ({t.s}, {t.m}, {t.e})"
        )
    return float(gaussian_t_batch(prefix, *_columns(t))[0])


def _check_uncentered(prefix, kind):
    if prefix.shift:
        raise InvalidArgumentError(
            f"the {kind} statistic needs sums of the raw series, not centered ones"
        )


def poisson_stat(prefix, t):
    _check_triplet(t, prefix.n)
    _check_uncentered(prefix, POISSON)
    _validate_window(prefix, t, POISSON)
    return float(poisson_batch(prefix, *_columns(t))[0])


def exponential_stat(prefix, t):
    _check_triplet(t, prefix.n)
    _check_uncentered(prefix, EXPONENTIAL)
    _validate_window(prefix, t, EXPONENTIAL)
    return float(exponential_batch(prefix, *_columns(t))[0])


def wilcoxon_stat(y, t):
    _check_triplet(t, len(y))
    values, _ = wilcoxon_batch(y, *_columns(t))
    return float(values[0])


def _rank_sum_sweep(depths):
    """
    Walk the subset-sum recursion over the ranks ``1, 2, ...`` once.

    :param dict depths: for every wanted span, the largest subset size
      (at most half the span) whose counts are needed there
    :yields: ``(span, rows)`` in increasing span, where ``rows[j][w]``
      counts the ``j``-subsets of ``1, ..., span`` summing to ``w``
    """
    depth = max(depths.values())
    # row j is updated only while some wanted span still needs it
    until = [0] * (depth + 1)
    for span, needed in depths.items():
        for j in range(needed + 1):
            until[j] = max(until[j], span)
    rows = [
        np.zeros(j * (2 * until[j] - j + 1) // 2 + 1, dtype=np.float64)
        for j in range(depth + 1)
    ]
    rows[0][0] = 1.0
    for rank in range(1, max(depths) + 1):
        for j in range(min(rank, depth), 0, -1):
            if until[j] < rank:
                continue
            source = rows[j - 1][:max(0, len(rows[j]) - rank)]
            rows[j][rank:rank + len(source)] += source
        if rank in depths:
            yield rank, rows


def _row_counts(row, k, span):
    j = min(k, span - k)
    top_k = k * (2 * span - k + 1) // 2
    row = row[:j * (2 * span - j + 1) // 2 + 1]
    if j == k:
        return row.copy()
    # complement subsets: sum over k ranks = total - sum over span - k ranks
    counts = np.zeros(top_k + 1, dtype=np.float64)
    index = span * (span + 1) // 2 - np.arange(len(row))
    keep = index <= top_k
    counts[index[keep]] = row[keep]
    return counts


@lru_cache(maxsize=256)
def wilcoxon_null_counts(k, span):
    """
    Null frequencies of the rank sum of ``k`` out of ``span`` distinct ranks.

    Built with the subset-sum counting recursion over the ranks
    ``1, ..., span``: ``counts[w]`` is the number of ``k``-subsets whose
    elements sum to ``w``.  Sizes above ``span / 2`` are read off the
    complementary subsets.

    :rtype: numpy.ndarray (read-only)
    """
    if not 1 <= k < span:
        raise InvalidArgumentError(f"need 1 <= k < span, got k={k}, span={span}")
    j = min(k, span - k)
    for _, rows in _rank_sum_sweep({span: j}):
        counts = _row_counts(rows[j], k, span)
    counts.setflags(write=False)
    return counts


def _deviation_quantile(counts, k, span, alpha):
    sums = np.flatnonzero(counts)
    deviation = np.abs(2 * sums - k * (span + 1))
    support, inverse = np.unique(deviation, return_inverse=True)
    mass = np.bincount(inverse, weights=counts[sums])
    mass /= mass.sum()
    # tail[i] = P(D > support[i])
    tail = mass[::-1].cumsum()[::-1] - mass
    return int(support[np.argmax(tail <= alpha)])


@lru_cache(maxsize=4096)
def _exact_deviation_quantile(k, span, alpha):
    return _deviation_quantile(wilcoxon_null_counts(k, span), k, span, alpha)


def exact_deviation_quantiles(k, span, alpha):
    """
    Exact rank-sum deviation quantiles for column arrays of requests.

    A single sweep of the counting recursion serves every span: the counts
    for span ``N`` are complete once rank ``N`` has been added.
    """
    keys = list(zip(
        np.asarray(k).tolist(), np.asarray(span).tolist(),
        np.asarray(alpha, dtype=np.float64).tolist(),
    ))
    if not keys:
        return np.zeros(0, dtype=np.int64)
    requests, depths = {}, {}
    for key in set(keys):
        size, width, _ = key
        if not 1 <= size < width:
            raise InvalidArgumentError(
                f"need 1 <= k < span, got k={size}, span={width}"
            )
        requests.setdefault(width, []).append(key)
        depths[width] = max(depths.get(width, 0), min(size, width - size))
    quantiles = {}
    for width, rows in _rank_sum_sweep(depths):
        for size, _, level in requests[width]:
            row = rows[min(size, width - size)]
            quantiles[size, width, level] = _deviation_quantile(
                _row_counts(row, size, width), size, width, level)
    return np.asarray([quantiles[key] for key in keys], dtype=np.int64)


def wilcoxon_exact_quantile(k, span, alpha):
    """
    ``(1 - alpha)``-quantile of the standardised rank-sum statistic.

    The smallest support point ``c`` of the exact permutation null with
    ``P(T > c) <= alpha``.
    """
    if not 0.0 < alpha < 1.0:
        raise InvalidArgumentError(f"alpha must lie in (0, 1), got {alpha}")
    deviation = _exact_deviation_quantile(int(k), int(span), float(alpha))
    return float(_rank_sum_statistic(k, span, float(deviation)))


def exp_family_tail_bound(x):
    """Tail bound ``(4 + 2 x**2) exp(-x**2 / 2)`` of the exponential-family statistic."""
    return (4.0 + 2.0 * x * x) * math.exp(-x * x / 2.0)


def simplified_tail_bound(x):
    """The simplified bound ``(4 + 2 e) exp(-x**2 / 2)``, valid for moderate ``x``."""
    return EXP_FAMILY_CONSTANT * math.exp(-x * x / 2.0)


def critical_values_batch(model, alpha_t, s, m, e, tied=None,
                          exact_limit=EXACT_WILCOXON_LIMIT):
    """
    Critical values ``c_{t,n}(alpha_t)`` for column arrays of triplets.

    :param alpha_t: per-triplet levels, same length as ``s``
    :param tied: for Wilcoxon, flags windows with ties (exact mode falls
      back to the bound there)
    """
    alpha_t = np.asarray(alpha_t, dtype=np.float64)
    if np.any((alpha_t <= 0.0) | (alpha_t >= 1.0)):
        raise InvalidArgumentError("every alpha_t must lie in (0, 1)")
    if model.kind == GAUSSIAN_KNOWN:
        return stats.norm.isf(alpha_t / 2.0)
    if model.kind == GAUSSIAN_UNKNOWN:
        df = e - s - 2
        if np.any(df < 1):
            raise InvalidTripletError("the t-statistic needs e - s >= 4")
        return stats.t.isf(alpha_t / 2.0, df)
    if model.kind in (POISSON, EXPONENTIAL):
        return np.sqrt(2.0 * np.log(EXP_FAMILY_CONSTANT / alpha_t))
    bound = np.sqrt(2.0 * np.log(2.0 / alpha_t))
    if model.wilcoxon_mode == WILCOXON_BOUND:
        return bound
    k, span = m - s, e - s
    exact = (k * (e - m) * span) <= exact_limit
    if tied is not None:
        exact &= ~np.asarray(tied, dtype=bool)
    values = bound.copy()
    if np.any(exact):
        deviation = exact_deviation_quantiles(k[exact], span[exact], alpha_t[exact])
        values[exact] = _rank_sum_statistic(
            k[exact].astype(np.float64), span[exact].astype(np.float64),
            deviation.astype(np.float64))
    return values


def critical_value(model, alpha_t, t, tied=False, exact_limit=EXACT_WILCOXON_LIMIT):
    """Critical value of one triplet; see :func:`critical_values_batch`."""
    if not 0.0 < alpha_t < 1.0:
        raise InvalidArgumentError(f"alpha_t must lie in (0, 1), got {alpha_t}")
    s, m, e = _columns(t)
    return float(critical_values_batch(
        model, np.asarray([alpha_t]), s, m, e,
        tied=np.asarray([tied]), exact_limit=exact_limit,
    )[0])


def _invalid_values(y, kind):
    """Mask of the values ``kind`` rejects and the reason, or ``None``."""
    finite = np.isfinite(y)
    if not finite.all():
        return ~finite, "is not a finite number"
    if kind == POISSON:
        bad = (y < 0) | (np.abs(y - np.round(y)) > INTEGRALITY_TOLERANCE)
        if bad.any():
            return bad, f"is not a nonnegative integer (model {POISSON})"
    if kind == EXPONENTIAL:
        bad = y <= 0
        if bad.any():
            return bad, f"is not strictly positive (model {EXPONENTIAL})"
    return None


def _raise_first(y, bad, reason, offset=0):
    index = int(np.flatnonzero(bad)[0])
    raise InvalidDataError(
        f"value {y[index]!r} at index {offset + index} {reason}",
        index=offset + index,
    )


def _validate_window(prefix, t, kind):
    window = prefix.values[t.s:t.e]
    problem = _invalid_values(window, kind)
    if problem is not None:
        _raise_first(window, *problem, offset=t.s)


def validate_series(y, model):
    """
    Check that ``y`` is a valid series for ``model``.

    :returns: the series as a float64 array
    :raises InvalidDataError: naming the first offending index
    """
    y = np.asarray(y, dtype=np.float64)
    if y.ndim != 1:
        raise InvalidDataError(f"expected a one-dimensional series, got shape {y.shape}")
    problem = _invalid_values(y, model.kind)
    if problem is not None:
        _raise_first(y, *problem)
    return y

# Copyright 2026 lbd-changepoint contributors
# Licensed under the Apache License, Version 2.0

"""
Deterministic sparse grids of Bonferroni intervals and Bonferroni triplets.

Intervals of dyadic level ``l`` have lengths in ``[2**l, 2**(l+1))`` and
endpoints on the lattice spaced ``d_l`` apart. A triplet ``(s, m, e)`` joins
one such interval with an abutting extension whose length is itself a
Bonferroni interval length, either to the right (``e - m >= m - s``) or to
the left (``m - s > e - m``).

Triplets are never enumerated one by one during a scan. They are grouped in
:class:`TripletFamily` objects, all members of which share level, inner
length, extension length and side, so that a family expands into numpy
index arrays over the admissible lattice anchors.
"""

from dataclasses import dataclass
from functools import lru_cache
import math

from colcon_core.logging import colcon_logger
from lbd_changepoint.exceptions import InvalidArgumentError
import numpy as np

logger = colcon_logger.getChild(__name__)

MIN_SERIES_LENGTH = 8

# default number of triplets per batch handed to the scan
BATCH_SIZE = 1 << 20

RIGHT = "right"
LEFT = "left"


def _check_length(n):
    if int(n) != n or n < MIN_SERIES_LENGTH:
        raise InvalidArgumentError(
            f"series length must be an integer >= {MIN_SERIES_LENGTH}, got {n!r} "
            "(no Bonferroni level exists for shorter series)"
        )
    return int(n)


def max_level(n):
    """Return ``floor(log2(n / 4)) - 1``, the largest grid level for ``n``."""
    n = _check_length(n)
    # floor(log2(n / 4)) == floor(log2(n)) - 2 for integer n
    return n.bit_length() - 4


def _check_level(level, n):
    top = max_level(n)
    if int(level) != level or not 0 <= level <= top:
        raise InvalidArgumentError(
            f"level must be an integer in [0, {top}] for n = {n}, got {level!r}"
        )
    return int(level)


def grid_spacing(level, n):
    """
    Lattice spacing of the Bonferroni intervals at ``level``.

    ``d_l = ceil(2**l / sqrt(2 ln(e n / 2**l)))`` with the natural logarithm.

    :rtype: int
    """
    level = _check_level(level, n)
    scale = 2 ** level
    spacing = math.ceil(scale / math.sqrt(2.0 * math.log(math.e * n / scale)))
    return max(1, spacing)


def first_block_end(n):
    """Return ``s_n = ceil(log2(ln n))``; levels below it form block 1."""
    n = _check_length(n)
    return math.ceil(math.log2(math.log(n)))


def max_block(n):
    """
    Return the number of blocks ``B_max``.

    The closed form ``floor(log2(n / 4)) - s_n + 1`` is not positive for the
    smallest series although level 0 exists there, so it is clamped to 1.
    """
    return max(1, max_level(n) + 2 - first_block_end(n))


def block_index(level, n):
    """Block of the triplets whose Bonferroni interval has ``level``."""
    level = _check_level(level, n)
    s_n = first_block_end(n)
    if level <= s_n - 1:
        return 1
    return level - s_n + 2


def count_bound(n):
    """Upper bound ``24 n ln(e n)**2.5`` on the number of triplets."""
    return 24.0 * n * math.log(math.e * n) ** 2.5


def length_bound(n):
    """Upper bound ``3 ln(n)**1.5`` on the number of interval lengths."""
    return 3.0 * math.log(n) ** 1.5


def interval_bound(level, n):
    """Upper bound ``(2 n / 2**l) ln(e n)`` on the intervals of one level."""
    return 2.0 * n / 2 ** level * math.log(math.e * n)


@dataclass(frozen=True)
class GridLevel:
    """A dyadic scale and its lattice spacing."""

    level: int
    spacing: int

    @property
    def lengths(self):
        """Interval lengths of this level: multiples of the spacing in range."""
        low, high = 2 ** self.level, 2 ** (self.level + 1)
        first = -(-low // self.spacing) * self.spacing
        return tuple(range(first, high, self.spacing))


@dataclass(frozen=True)
class BonferroniInterval:
    """The half-open interval ``(left, right]`` of a grid level."""

    left: int
    right: int
    level: GridLevel

    @property
    def length(self):
        return self.right - self.left


@dataclass(frozen=True)
class LengthMenu:
    """Sorted distinct lengths of all Bonferroni intervals for one ``n``."""

    lengths: tuple

    def __contains__(self, length):
        return length in self.lengths

    def __iter__(self):
        return iter(self.lengths)

    def __len__(self):
        return len(self.lengths)


@dataclass(frozen=True)
class Triplet:
    """A Bonferroni triplet: test for a changepoint at ``m`` on ``(s, e]``."""

    s: int
    m: int
    e: int
    level: int
    block: int

    @property
    def side(self):
        """``right`` when ``(s, m]`` is the Bonferroni interval, else ``left``."""
        return RIGHT if self.e - self.m >= self.m - self.s else LEFT

    @property
    def confidence_interval(self):
        """The closed interval ``[s + 1, e - 1]`` reported when significant."""
        return self.s + 1, self.e - 1

    def as_dict(self):
        return {
            "s": self.s, "m": self.m, "e": self.e,
            "level": self.level, "block": self.block,
        }


@dataclass(frozen=True)
class TripletBatch:
    """Column arrays of a group of triplets."""

    s: np.ndarray
    m: np.ndarray
    e: np.ndarray
    level: np.ndarray
    block: np.ndarray

    def __len__(self):
        return len(self.s)

    def select(self, mask):
        return TripletBatch(
            self.s[mask], self.m[mask], self.e[mask],
            self.level[mask], self.block[mask],
        )

    def triplet(self, i):
        return Triplet(
            int(self.s[i]), int(self.m[i]), int(self.e[i]),
            int(self.level[i]), int(self.block[i]),
        )

    @classmethod
    def concatenate(cls, batches):
        batches = [b for b in batches if len(b)]
        if not batches:
            empty = np.zeros(0, dtype=np.int64)
            return cls(empty, empty, empty, empty, empty)
        if len(batches) == 1:
            return batches[0]
        return cls(*(
            np.concatenate([getattr(b, name) for b in batches])
            for name in ("s", "m", "e", "level", "block")
        ))


@dataclass(frozen=True)
class TripletFamily:
    """
    Triplets sharing level, inner length, extension length and side.

    For the right side the Bonferroni interval is ``(s, s + inner]`` with
    ``s`` on the lattice, followed by the extension ``(m, m + extension]``.
    For the left side the Bonferroni interval is ``(m, m + inner]`` with
    ``m`` on the lattice, preceded by ``(m - extension, m]``.
    """

    n: int
    level: int
    block: int
    spacing: int
    inner: int
    extension: int
    side: str

    @property
    def span(self):
        """Common value of ``e - s`` for every member."""
        return self.inner + self.extension

    def _anchors(self):
        d = self.spacing
        if self.side == RIGHT:
            # anchor is s
            return 0, self.n - self.span
        # anchor is m
        return -(-self.extension // d) * d, self.n - self.inner

    @property
    def count(self):
        first, last = self._anchors()
        if last < first:
            return 0
        return (last - first) // self.spacing + 1

    @property
    def first_anchor(self):
        return self._anchors()[0]

    def at(self, index):
        """Return ``(s, m, e)`` of the members at positions ``index`` along the lattice."""
        anchors = self.first_anchor + np.asarray(index, dtype=np.int64) * self.spacing
        if self.side == RIGHT:
            s = anchors
            m = s + self.inner
            e = m + self.extension
        else:
            m = anchors
            s = m - self.extension
            e = m + self.inner
        return s, m, e

    def arrays(self):
        """Return ``(s, m, e)`` index arrays of all members."""
        return self.at(np.arange(self.count, dtype=np.int64))

    def batch(self, index=None):
        """Members as a :class:`TripletBatch`, all of them or those at ``index``."""
        s, m, e = self.arrays() if index is None else self.at(index)
        return TripletBatch(
            s, m, e,
            np.full(len(s), self.level, dtype=np.int64),
            np.full(len(s), self.block, dtype=np.int64),
        )


@dataclass(frozen=True)
class FamilyGroup:
    """
    Families sharing level, inner length and side.

    Their members reuse the Bonferroni intervals of one lattice, so a scan
    sums every interval once for the whole group. ``positions`` holds the
    index of each family in its :class:`TripletSelection`.
    """

    families: tuple
    positions: tuple

    @property
    def head(self):
        return self.families[0]

    @property
    def count(self):
        return sum(family.count for family in self.families)

    @property
    def anchor_count(self):
        """Number of lattice anchors whose Bonferroni interval fits in the series."""
        head = self.head
        return (head.n - head.inner) // head.spacing + 1


@dataclass(frozen=True)
class TripletSelection:
    """The triplet families one scan evaluates."""

    n: int
    families: tuple

    def __len__(self):
        return sum(family.count for family in self.families)

    def batch(self):
        """Materialise every selected triplet as one :class:`TripletBatch`."""
        return TripletBatch.concatenate([family.batch() for family in self.families])

    def groups(self):
        """Split the families into :class:`FamilyGroup` objects."""
        keyed = {}
        for position, family in enumerate(self.families):
            key = (family.level, family.inner, family.side)
            keyed.setdefault(key, []).append(position)
        return tuple(
            FamilyGroup(
                tuple(self.families[position] for position in positions),
                tuple(positions),
            )
            for positions in keyed.values()
        )


def grid_levels(n):
    """Return the :class:`GridLevel` objects of ``n`` from level 0 upwards."""
    return tuple(
        GridLevel(level, grid_spacing(level, n)) for level in range(max_level(n) + 1)
    )


def build_intervals(n):
    """
    Enumerate all Bonferroni intervals of a series of length ``n``.

    :returns: list of :class:`BonferroniInterval` ordered by
      (level, left, right)
    """
    n = _check_length(n)
    intervals = []
    for grid_level in grid_levels(n):
        d = grid_level.spacing
        level_intervals = [
            BonferroniInterval(left, left + length, grid_level)
            for length in grid_level.lengths
            for left in range(0, n - length + 1, d)
        ]
        level_intervals.sort(key=lambda interval: (interval.left, interval.right))
        intervals.extend(level_intervals)
    return intervals


def interval_lengths(n):
    """Return the :class:`LengthMenu` ``L_n``."""
    n = _check_length(n)
    lengths = set()
    for grid_level in grid_levels(n):
        lengths.update(grid_level.lengths)
    return LengthMenu(tuple(sorted(lengths)))


class TripletGrid:
    """
    All Bonferroni triplets of a series length, as families.

    Instances are immutable after construction and shared through
    :func:`get_grid`.
    """

    def __init__(self, n):  # noqa: D107
        self.n = _check_length(n)
        self.levels = grid_levels(self.n)
        self.lengths = interval_lengths(self.n)
        self.first_block_end = first_block_end(self.n)
        self.max_block = max_block(self.n)
        self.families = tuple(self._build_families())
        logger.debug(
            "grid n=%d: %d levels, %d lengths, %d families, %d triplets",
            self.n, len(self.levels), len(self.lengths),
            len(self.families), self.count,
        )

    def _build_families(self):
        for grid_level in self.levels:
            block = block_index(grid_level.level, self.n)
            for inner in grid_level.lengths:
                for extension in self.lengths:
                    for side in (RIGHT, LEFT):
                        if side == RIGHT and extension < inner:
                            continue
                        if side == LEFT and extension <= inner:
                            continue
                        family = TripletFamily(
                            self.n, grid_level.level, block, grid_level.spacing,
                            inner, extension, side,
                        )
                        if family.count:
                            yield family

    @property
    def count(self):
        """Total number of triplets."""
        return sum(family.count for family in self.families)

    @property
    def block_sizes(self):
        sizes = [0] * self.max_block
        for family in self.families:
            sizes[family.block - 1] += family.count
        return sizes

    def interval_count(self, level=None):
        """Number of Bonferroni intervals, overall or of one level."""
        total = 0
        for grid_level in self.levels:
            if level is not None and grid_level.level != level:
                continue
            d = grid_level.spacing
            total += sum((self.n - length) // d + 1 for length in grid_level.lengths)
        return total

    def level_statistics(self):
        """
        Per-level summary used by ``lbd grid --stats``.

        :rtype: list of dict
        """
        triplets = {grid_level.level: 0 for grid_level in self.levels}
        for family in self.families:
            triplets[family.level] += family.count
        return [
            {
                "level": grid_level.level,
                "spacing": grid_level.spacing,
                "block": block_index(grid_level.level, self.n),
                "lengths": len(grid_level.lengths),
                "intervals": self.interval_count(grid_level.level),
                "interval_bound": interval_bound(grid_level.level, self.n),
                "triplets": triplets[grid_level.level],
            }
            for grid_level in self.levels
        ]

    def select(self, max_span=None, min_inner=1):
        """
        Families whose span is at most ``max_span`` and inner length >= ``min_inner``.

        :rtype: :class:`TripletSelection`
        """
        return TripletSelection(self.n, tuple(
            family for family in self.families
            if family.inner >= min_inner
            and (max_span is None or family.span <= max_span)
        ))

    def triplets(self):
        """Materialise every triplet, ordered by (level, s, m, e)."""
        batch = TripletBatch.concatenate(
            [family.batch() for family in self.families]
        )
        order = np.lexsort((batch.e, batch.m, batch.s, batch.level))
        batch = batch.select(order)
        return [batch.triplet(i) for i in range(len(batch))]


@lru_cache(maxsize=16)
def get_grid(n):
    """Return the shared :class:`TripletGrid` of ``n``."""
    return TripletGrid(n)


def build_triplets(n):
    """Return all Bonferroni triplets of ``n`` ordered by (level, s, m, e)."""
    return get_grid(_check_length(n)).triplets()


def count_triplets(n):
    """Number of Bonferroni triplets of ``n`` without materialising them."""
    return get_grid(_check_length(n)).count


def block_sizes(n):
    """Element ``B - 1`` is the number of triplets in block ``B``."""
    return get_grid(_check_length(n)).block_sizes

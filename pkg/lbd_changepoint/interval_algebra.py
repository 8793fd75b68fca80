# Copyright 2026 lbd-changepoint contributors
# Licensed under the Apache License, Version 2.0

"""
Minimal intervals, a maximum disjoint subset and its size.

Intervals are integer closed intervals ``[lo, hi]``. Two intervals are
disjoint only when one starts strictly after the other ends, so intervals
sharing an endpoint overlap.
"""

from dataclasses import dataclass

from lbd_changepoint.exceptions import InvalidArgumentError


@dataclass(frozen=True, order=True)
class ClosedInterval:
    """The integer interval ``[lo, hi]``."""

    lo: int
    hi: int

    def __post_init__(self):  # noqa: D105
        if self.lo > self.hi:
            raise InvalidArgumentError(
                f"interval lower end {self.lo} exceeds upper end {self.hi}"
            )

    def contains(self, point):
        return contains_point(self, point)

    def is_subset(self, other):
        return other.lo <= self.lo and self.hi <= other.hi

    def as_list(self):
        return [self.lo, self.hi]


def contains_point(interval, point):
    return interval.lo <= point <= interval.hi


def is_disjoint(a, b):
    return a.lo > b.hi or b.lo > a.hi


def _as_intervals(collection):
    intervals = []
    for item in collection:
        if isinstance(item, ClosedInterval):
            intervals.append(item)
        else:
            lo, hi = item
            intervals.append(ClosedInterval(int(lo), int(hi)))
    return intervals


def minimal_and_disjoint(collection):
    """
    Inclusion-minimal intervals and a largest set of disjoint intervals.

    One pass over the intervals ordered by increasing right end, ties by
    decreasing left end. ``f`` is the right end of the last disjoint pick,
    ``(g, h)`` the last minimal interval. Duplicates in the input are
    allowed; both outputs are duplicate-free.

    :param collection: iterable of :class:`ClosedInterval` or ``(lo, hi)``
    :returns: tuple ``(minimal, disjoint, count)``
    :raises InvalidArgumentError: if some ``lo > hi``
    """
    intervals = sorted(_as_intervals(collection), key=lambda iv: (iv.hi, -iv.lo))
    minimal, disjoint = [], []
    f = g = h = float("-inf")
    for interval in intervals:
        if interval.lo > f:
            disjoint.append(interval)
            f = interval.hi
        if interval.lo > g and interval.hi > h:
            minimal.append(interval)
            g, h = interval.lo, interval.hi
    return minimal, disjoint, len(disjoint)


def oracle_minimal(collection):
    """Minimal intervals by pairwise inclusion checks (quadratic)."""
    distinct = sorted(set(_as_intervals(collection)))
    return [
        interval for interval in distinct
        if not any(
            other != interval and other.is_subset(interval) for other in distinct
        )
    ]


def oracle_max_disjoint(collection):
    """Size of a largest disjoint subset by greedy earliest-end scheduling."""
    count, end = 0, float("-inf")
    for interval in sorted(_as_intervals(collection), key=lambda iv: iv.hi):
        if interval.lo > end:
            count += 1
            end = interval.hi
    return count

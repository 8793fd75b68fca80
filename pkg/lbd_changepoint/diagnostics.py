# Copyright 2026 lbd-changepoint contributors
# Licensed under the Apache License, Version 2.0

"""Detectability and localization formulas for planning an analysis."""

from dataclasses import dataclass
import math

from lbd_changepoint.exceptions import InvalidArgumentError
from lbd_changepoint.exceptions import NotDetectableError
from lbd_changepoint.exceptions import UnboundedPrecisionError

DEFAULT_SLACK = 3.0

SINGLE = "single"
EQUALLY_SPACED = "equally-spaced"
CRITICAL_CONSTANTS = {
    SINGLE: math.sqrt(2.0),
    EQUALLY_SPACED: 2.0 * math.sqrt(2.0),
}


@dataclass(frozen=True)
class ChangepointGeometry:
    """
    A changepoint seen through its jump and its distances to the neighbours.

    :param float jump: ``mu[tau + 1] - mu[tau]``
    :param int d_left: distance to the previous changepoint (or the start)
    :param int d_right: distance to the next changepoint (or the end)
    :param int n: series length
    :param int m_n: number of changepoints targeted simultaneously
    :param float b_n: slack added to the threshold
    """

    jump: float
    d_left: int
    d_right: int
    n: int
    m_n: int = 1
    b_n: float = DEFAULT_SLACK

    def __post_init__(self):  # noqa: D105
        if not math.isfinite(self.jump):
            raise InvalidArgumentError(f"jump must be finite, got {self.jump}")
        if self.d_left < 1 or self.d_right < 1:
            raise InvalidArgumentError(
                f"distances must be >= 1, got {self.d_left} and {self.d_right}"
            )
        if self.m_n < 1:
            raise InvalidArgumentError(f"m_n must be >= 1, got {self.m_n}")
        if not self.b_n >= 0:
            raise InvalidArgumentError(f"b_n must be >= 0, got {self.b_n}")
        if self.min_distance > self.n:
            raise InvalidArgumentError(
                f"the smaller distance {self.min_distance} exceeds n = {self.n}"
            )

    @property
    def min_distance(self):
        return min(self.d_left, self.d_right)


def _threshold(n, distance, m_n, b_n, factor):
    return (
        math.sqrt(factor * math.log(n / distance))
        + math.sqrt(factor * math.log(m_n))
        + b_n
    )


def energy(geometry):
    """``|jump| * sqrt(d_left * d_right / (d_left + d_right))``"""
    d_left, d_right = geometry.d_left, geometry.d_right
    return abs(geometry.jump) * math.sqrt(d_left * d_right / (d_left + d_right))


def detection_threshold(geometry):
    """Energy needed for simultaneous detection of ``m_n`` changepoints."""
    return _threshold(
        geometry.n, geometry.min_distance, geometry.m_n, geometry.b_n, 2.0
    )


def count_threshold(geometry):
    """Energy needed for the changepoints to give disjoint intervals."""
    return _threshold(
        geometry.n, geometry.min_distance, geometry.m_n, geometry.b_n, 4.0
    )


def is_detectable(geometry):
    return energy(geometry) >= detection_threshold(geometry)


def _g(geometry, x):
    # log(n / x) is clamped at 0 for x beyond n
    numerator = (
        math.sqrt(2.0 * max(math.log(geometry.n / x), 0.0))
        + math.sqrt(2.0 * math.log(geometry.m_n))
        + geometry.b_n
    )
    return (numerator / geometry.jump) ** 2


def _symmetric_case(geometry):
    """Detection condition with both distances replaced by the smaller one."""
    m = geometry.min_distance
    symmetric = abs(geometry.jump) * math.sqrt(m / 2.0)
    return symmetric >= _threshold(geometry.n, m, geometry.m_n, geometry.b_n, 2.0)


def precision_bound(geometry):
    """
    Upper bound on the localization precision of a detectable changepoint.

    Returns ``2 g(jump**-2)`` when the detection condition already holds
    with both distances equal to the smaller one, and
    ``g(m) / (1 - g(m) / m)`` otherwise, ``m`` being the smaller distance.

    :raises NotDetectableError: if the energy is below the threshold
    :raises UnboundedPrecisionError: if ``g(m) >= m`` in the second case
    """
    if geometry.jump == 0 or not is_detectable(geometry):
        raise NotDetectableError(
            f"energy {energy(geometry):.4f} is below the detection threshold "
            f"{detection_threshold(geometry):.4f}"
        )
    if _symmetric_case(geometry):
        return 2.0 * _g(geometry, geometry.jump ** -2)
    m = geometry.min_distance
    g = _g(geometry, m)
    if g >= m:
        raise UnboundedPrecisionError(
            f"g(m) = {g:.4f} is not below the smaller distance m = {m}"
        )
    return g / (1.0 - g / m)


def critical_constant(regime=SINGLE):
    """Multiplier of ``sqrt(log(n / d_min))`` separating detectable from not."""
    try:
        return CRITICAL_CONSTANTS[regime]
    except KeyError:
        raise InvalidArgumentError(
            f"unknown regime '{regime}', expected one of "
            f"{', '.join(sorted(CRITICAL_CONSTANTS))}"
        ) from None


def normalized_energy(geometry):
    """Energy in units of ``sqrt(log(n / d_min))``."""
    scale = math.log(geometry.n / geometry.min_distance)
    if scale <= 0:
        raise InvalidArgumentError(
            "normalized energy needs the smaller distance to be below n"
        )
    return energy(geometry) / math.sqrt(scale)


def plan(geometry):
    """
    Everything ``lbd plan`` reports for one geometry.

    :rtype: dict
    """
    report = {
        "energy": energy(geometry),
        "detection_threshold": detection_threshold(geometry),
        "count_threshold": count_threshold(geometry),
        "detectable": is_detectable(geometry),
        "precision_bound": None,
        "precision_note": None,
        "critical_constant": critical_constant(
            SINGLE if geometry.m_n == 1 else EQUALLY_SPACED
        ),
    }
    if geometry.min_distance < geometry.n:
        report["normalized_energy"] = normalized_energy(geometry)
    try:
        report["precision_bound"] = precision_bound(geometry)
    except (NotDetectableError, UnboundedPrecisionError) as e:
        report["precision_note"] = str(e)
    return report

# Copyright 2026 lbd-changepoint contributors
# Licensed under the Apache License, Version 2.0

"""Weighted Bonferroni levels: weight ``1/B`` for every triplet of block ``B``."""

from dataclasses import dataclass
import math

from colcon_core.logging import colcon_logger
from lbd_changepoint.exceptions import InvalidArgumentError
import numpy as np

logger = colcon_logger.getChild(__name__)


@dataclass(frozen=True)
class CalibrationTable:
    """
    Per-triplet significance levels indexed by block.

    ``per_block_alpha[B - 1] = alpha / (B * harmonic * block_sizes[B - 1])``
    """

    alpha: float
    block_sizes: tuple
    per_block_alpha: tuple
    harmonic: float

    @property
    def max_block(self):
        return len(self.block_sizes)

    def level_for_block(self, block):
        if not 1 <= block <= self.max_block:
            raise InvalidArgumentError(
                f"block must be in [1, {self.max_block}], got {block}"
            )
        return self.per_block_alpha[block - 1]

    def levels_for(self, blocks):
        """Vectorised lookup of the level of each entry of ``blocks``."""
        table = np.asarray(self.per_block_alpha, dtype=np.float64)
        return table[np.asarray(blocks, dtype=np.int64) - 1]

    def total(self):
        """Sum of the levels over all triplets; equals ``alpha``."""
        return math.fsum(
            size * level
            for size, level in zip(self.block_sizes, self.per_block_alpha)
        )


def calibrate(alpha, block_sizes):
    """
    Build the :class:`CalibrationTable` for ``alpha`` and the block sizes.

    :param float alpha: simultaneous level in (0, 1)
    :param block_sizes: number of triplets of each block, block 1 first
    :raises InvalidArgumentError: for alpha outside (0, 1), an empty or
      non-positive block list, or levels that underflow to zero
    """
    alpha = float(alpha)
    if not 0.0 < alpha < 1.0:
        raise InvalidArgumentError(f"alpha must lie in (0, 1), got {alpha}")
    sizes = tuple(int(size) for size in block_sizes)
    if not sizes:
        raise InvalidArgumentError("at least one block is required")
    if any(size < 1 for size in sizes):
        raise InvalidArgumentError(f"every block needs at least one triplet: {sizes}")

    harmonic = math.fsum(1.0 / b for b in range(1, len(sizes) + 1))
    # long double keeps the products exact enough for the budget identity
    levels = [
        np.longdouble(alpha) / (np.longdouble(b) * np.longdouble(harmonic) * size)
        for b, size in enumerate(sizes, start=1)
    ]
    per_block = tuple(float(level) for level in levels)
    if any(level <= 0.0 for level in per_block):
        raise InvalidArgumentError(
            f"alpha = {alpha} underflows to a zero per-triplet level"
        )
    logger.debug(
        "calibrated alpha=%g over %d blocks (harmonic=%.6f)",
        alpha, len(sizes), harmonic,
    )
    return CalibrationTable(alpha, sizes, per_block, harmonic)

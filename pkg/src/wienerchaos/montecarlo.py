"""Reproducible Gaussian sampling and block-means estimation.

Sampling is counter based: block b of a batch draws from an independent
Philox-4x64 stream keyed by (seed, b), so any block can be regenerated
without the others and parallel evaluation cannot change the draws.
Uniforms are mapped to normals through the inverse CDF; rejection-style
generators are avoided because they consume a variable number of uniforms
per normal.  Every serialized output carries GENERATOR_TAG so results are
only ever compared within one generator version.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Iterator

import numpy as np
from scipy.special import ndtri

from .exceptions import ResourceLimitError, ValidationError

GENERATOR_TAG = "philox4x64-ndtri/1"

# Default number of blocks a batch is split into; block means feed stderr.
DEFAULT_BLOCKS = 64

# Minimum number of full blocks estimate() accepts for a stderr.
MIN_BLOCKS = 30

_MATERIALIZE_LIMIT = 1 << 26

_HALF_ULP = 2.0**-54


def _block_normals(seed: int, block: int, size: int, dimension: int) -> np.ndarray:
    bitgen = np.random.Philox(key=np.array([seed, block], dtype=np.uint64))
    uniforms = np.random.Generator(bitgen).random(size=(size, dimension), dtype=np.float64)
    return ndtri(uniforms + _HALF_ULP)


@dataclass(frozen=True)
class SampleBatch:
    """Lazy matrix of standard-normal draws, materialized block by block.

    Fields identify the draws completely: regenerating with equal
    (seed, dimension, count, block_size) under the same GENERATOR_TAG
    reproduces every entry bitwise.
    """

    seed: int
    dimension: int
    count: int
    block_size: int

    def __post_init__(self) -> None:
        if not isinstance(self.seed, int) or not 0 <= self.seed < 2**64:
            raise ValidationError(f"seed must be an integer in [0, 2**64), got {self.seed!r}")
        if not isinstance(self.dimension, int) or self.dimension < 1:
            raise ValidationError(f"dimension must be a positive integer, got {self.dimension!r}")
        if not isinstance(self.count, int) or self.count < 1:
            raise ValidationError(f"count must be a positive integer, got {self.count!r}")
        if not isinstance(self.block_size, int) or self.block_size < 1:
            raise ValidationError(f"block_size must be a positive integer, got {self.block_size!r}")

    @property
    def n_blocks(self) -> int:
        return -(-self.count // self.block_size)

    @property
    def n_full_blocks(self) -> int:
        return self.count // self.block_size

    def block(self, index: int) -> np.ndarray:
        if not 0 <= index < self.n_blocks:
            raise ValidationError(f"block index {index} outside 0..{self.n_blocks - 1}")
        size = min(self.block_size, self.count - index * self.block_size)
        return _block_normals(self.seed, index, size, self.dimension)

    def iter_blocks(self) -> Iterator[np.ndarray]:
        for index in range(self.n_blocks):
            yield self.block(index)

    def materialize(self) -> np.ndarray:
        """Full (count, dimension) matrix; guarded against large batches."""
        if self.count * self.dimension > _MATERIALIZE_LIMIT:
            raise ResourceLimitError(
                f"materializing {self.count} x {self.dimension} draws exceeds the in-memory guard"
            )
        return np.concatenate(list(self.iter_blocks()), axis=0)


def sample(seed: int, dimension: int, count: int, block_size: int | None = None) -> SampleBatch:
    """Build a SampleBatch; block_size defaults to about DEFAULT_BLOCKS blocks."""
    if block_size is None:
        if not isinstance(count, int) or count < 1:
            raise ValidationError(f"count must be a positive integer, got {count!r}")
        block_size = max(1, count // DEFAULT_BLOCKS)
    return SampleBatch(seed=seed, dimension=dimension, count=count, block_size=block_size)


def estimate(fn: Callable[[np.ndarray], np.ndarray], batch: SampleBatch) -> tuple[float, float]:
    """Mean and block-means standard error of fn over a batch.

    fn maps a (block, dimension) array to per-sample values.  The mean runs
    over every sample; the standard error is the sample deviation of the
    full-size block means divided by sqrt(number of full blocks), and at
    least MIN_BLOCKS full blocks are required.

    Returns
    -------
    (mean, stderr) : tuple of float
    """
    if batch.n_full_blocks < MIN_BLOCKS:
        raise ValidationError(
            f"estimate needs at least {MIN_BLOCKS} full blocks, got {batch.n_full_blocks}; "
            "reduce block_size or increase count"
        )
    total = 0.0
    full_means = []
    for block in batch.iter_blocks():
        values = np.asarray(fn(block), dtype=np.float64)
        if values.shape != (block.shape[0],):
            raise ValidationError(f"fn returned shape {values.shape}, expected ({block.shape[0]},)")
        total += float(values.sum())
        if block.shape[0] == batch.block_size:
            full_means.append(float(values.mean()))
    mean = total / batch.count
    stderr = float(np.std(full_means, ddof=1) / math.sqrt(len(full_means)))
    return mean, stderr

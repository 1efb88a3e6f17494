"""
semiflight/streams.py

Random-number streams and work partitioning for the Monte Carlo layers.

Responsibilities
----------------
- Hand out counter-based generators keyed by ``(seed, stream_index)`` so the
  output of a sampler is fully determined by those two integers.
- Split a path budget into a deterministic partition plan (one chunk per
  worker rank) and iterate over it in fixed-size batches.
- Fan work out over a thread pool and merge the value-type results.
- Draw uniform directions on the unit sphere (shared by the subordinator
  and the velocity-chain samplers).
- Provide :class:`MomentEstimate`, the sufficient statistics (count, sum, sum
  of squares) used to merge Monte Carlo estimates across workers.

Environment Variables
---------------------
SEMIFLIGHT_WORKERS
    Default worker count when the caller does not pass one. Defaults to 1.

Notes
-----
- Workers are threads: the heavy kernels are numpy array operations which
  release the GIL, and threads let callers pass closures (test functions,
  samplers) without pickling.
- Results are always returned in rank order, so merging is deterministic for
  a fixed ``(seed, workers)`` pair. Different worker counts give different
  (equally valid) samples.
"""

from __future__ import annotations

import logging
import math
import os
from collections.abc import Callable, Iterable, Iterator
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import TypeVar

import numpy as np

logger = logging.getLogger(__name__)

T = TypeVar("T")

# Default batch size when a sampler pages through a large path budget.
BATCH_SIZE = 20_000

_MASK64 = (1 << 64) - 1


def default_workers() -> int:
    """Return the worker count configured through ``SEMIFLIGHT_WORKERS``.

    Returns:
        int: The configured count, or 1 when unset or unparsable.
    """
    raw = os.getenv("SEMIFLIGHT_WORKERS", "1")
    try:
        return max(1, int(raw))
    except ValueError:
        logger.warning("Ignoring non-integer SEMIFLIGHT_WORKERS=%r", raw)
        return 1


def stream(seed: int, index: int = 0) -> np.random.Generator:
    """Return the counter-based generator for ``(seed, index)``.

    The Philox key is the pair ``(seed, index)`` itself, so distinct stream
    indices never share a key and no state is carried between calls.

    Args:
        seed: 64-bit unsigned seed of the run.
        index: Stream index, usually the worker rank.

    Returns:
        numpy.random.Generator: A fresh generator positioned at counter zero.

    Raises:
        ValueError: If ``seed`` or ``index`` is negative or wider than 64 bits.
    """
    if not 0 <= seed <= _MASK64:
        raise ValueError(f"seed must be a 64-bit unsigned integer, got {seed}")
    if not 0 <= index <= _MASK64:
        raise ValueError(f"stream index must be a 64-bit unsigned integer, got {index}")
    key = np.array([seed, index], dtype=np.uint64)
    return np.random.Generator(np.random.Philox(key=key))


def partition(n_paths: int, workers: int) -> list[int]:
    """Split ``n_paths`` into ``workers`` near-equal chunk sizes.

    The first ``n_paths % workers`` ranks receive one extra path. Ranks with
    nothing to do receive 0.

    Args:
        n_paths: Total number of Monte Carlo paths (>= 0).
        workers: Number of worker ranks (>= 1).

    Returns:
        list[int]: Chunk size per rank, in rank order.
    """
    if workers < 1:
        raise ValueError(f"workers must be >= 1, got {workers}")
    if n_paths < 0:
        raise ValueError(f"n_paths must be >= 0, got {n_paths}")
    base, extra = divmod(n_paths, workers)
    return [base + (1 if rank < extra else 0) for rank in range(workers)]


def iter_batches(n: int, batch_size: int = BATCH_SIZE) -> Iterator[int]:
    """Yield batch sizes that add up to ``n``.

    Every batch is full except possibly the last one, mirroring offset paging.

    Args:
        n: Total number of items.
        batch_size: Maximum number of items per batch.

    Yields:
        Sizes of consecutive batches.
    """
    if batch_size < 1:
        raise ValueError(f"batch_size must be >= 1, got {batch_size}")
    done = 0
    while done < n:
        size = min(batch_size, n - done)
        yield size
        done += size


def sample_direction(d: int, n: int, rng: np.random.Generator) -> np.ndarray:
    """Draw ``n`` directions uniformly on the unit sphere of ``R^d``.

    For ``d == 1`` the sphere is ``{-1, +1}``; otherwise an isotropic Gaussian
    vector is normalised.

    Args:
        d: Dimension (>= 1).
        n: Number of directions.
        rng: Generator to draw from.

    Returns:
        numpy.ndarray: Array of shape ``(n, d)`` with unit rows.
    """
    if d < 1:
        raise ValueError(f"dimension must be >= 1, got {d}")
    if d == 1:
        return np.where(rng.random(n) < 0.5, -1.0, 1.0).reshape(n, 1)
    g = rng.standard_normal((n, d))
    norms = np.linalg.norm(g, axis=1)
    # A zero Gaussian vector has probability zero; redraw it anyway.
    while np.any(norms == 0.0):
        bad = norms == 0.0
        g[bad] = rng.standard_normal((int(bad.sum()), d))
        norms = np.linalg.norm(g, axis=1)
    return g / norms[:, None]


def fan_out(
    fn: Callable[[int, np.random.Generator], T],
    n_paths: int,
    seed: int,
    workers: int | None = None,
    offset: int = 0,
) -> list[T]:
    """Run ``fn(n_chunk, rng)`` once per worker rank and collect the results.

    Rank ``r`` receives the ``r``-th chunk of :func:`partition` and the
    generator ``stream(seed, offset + r)``. Ranks with an empty chunk are
    skipped.

    Args:
        fn: Callable evaluated per rank; must not share mutable state.
        n_paths: Total number of paths to distribute.
        seed: Seed of the run.
        workers: Worker count; defaults to :func:`default_workers`.
        offset: First stream index, so independent estimates within one run
            use disjoint streams.

    Returns:
        list: Per-rank results in rank order.
    """
    workers = workers or default_workers()
    plan = partition(n_paths, workers)
    jobs = [(offset + rank, size) for rank, size in enumerate(plan) if size > 0]
    logger.debug("fan_out: %d paths over %d workers, plan=%s", n_paths, workers, plan)

    if len(jobs) <= 1:
        return [fn(size, stream(seed, index)) for index, size in jobs]

    with ThreadPoolExecutor(max_workers=len(jobs)) as pool:
        futures = [pool.submit(fn, size, stream(seed, index)) for index, size in jobs]
        # Collect in submission (rank) order, not completion order.
        return [f.result() for f in futures]


@dataclass(frozen=True)
class MomentEstimate:
    """Sufficient statistics of a scalar Monte Carlo estimate.

    Attributes:
        count: Number of samples.
        total: Sum of the samples.
        total_sq: Sum of the squared samples.
    """

    count: int
    total: float
    total_sq: float

    @classmethod
    def from_values(cls, values: Iterable[float] | np.ndarray) -> MomentEstimate:
        arr = np.asarray(values, dtype=float).ravel()
        return cls(int(arr.size), math.fsum(arr), math.fsum(arr * arr))

    @classmethod
    def empty(cls) -> MomentEstimate:
        return cls(0, 0.0, 0.0)

    def __add__(self, other: MomentEstimate) -> MomentEstimate:
        return MomentEstimate(
            self.count + other.count,
            self.total + other.total,
            self.total_sq + other.total_sq,
        )

    @property
    def mean(self) -> float:
        if self.count == 0:
            raise ValueError("mean of an empty estimate")
        return self.total / self.count

    @property
    def variance(self) -> float:
        """Unbiased sample variance (0 for fewer than two samples)."""
        if self.count < 2:
            return 0.0
        centred = self.total_sq - self.total * self.total / self.count
        return max(centred, 0.0) / (self.count - 1)

    @property
    def stderr(self) -> float:
        if self.count == 0:
            raise ValueError("stderr of an empty estimate")
        return math.sqrt(self.variance / self.count)


def merge(estimates: Iterable[MomentEstimate]) -> MomentEstimate:
    """Merge per-worker estimates in the given order."""
    out = MomentEstimate.empty()
    for est in estimates:
        out = out + est
    return out

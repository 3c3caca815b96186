"""Drawing realizations from an independent per-region model.

Each realization takes one point per region by inverting the region's
cumulative weight table with a binary search, so a realization costs
O(k log N) and a fixed seed reproduces the same output bit for bit no matter
how the batch is scheduled (realization r uses the Philox stream keyed on
(seed, r) and consumes exactly k uniforms in region order).
"""

from __future__ import annotations

import time
from dataclasses import dataclass

import numpy as np

from .errors import InvalidArgumentError
from .partition import IndependentModel
from .rng import stream_uniforms


@dataclass(frozen=True)
class SampleSet:
    """One realization: k distinct flat cell indices, one per region, in region order."""

    points: np.ndarray

    def __post_init__(self):
        points = np.asarray(self.points, dtype=np.int64)
        object.__setattr__(self, "points", points)
        if points.ndim != 1:
            raise InvalidArgumentError("points must be a 1D index array")
        if np.unique(points).size != points.size:
            raise InvalidArgumentError("sample points must be distinct")

    @property
    def k(self) -> int:
        return self.points.size


def _invert(cums: np.ndarray, cells: np.ndarray, u) -> np.ndarray:
    # first cumulative entry strictly above u; u in [0, 1) and cums[-1] == 1.0
    # guarantee a hit, and zero-weight cells (repeated cumulative values) are
    # unreachable
    return cells[np.searchsorted(cums, u, side="right")]


def sample_one(model: IndependentModel, rng: np.random.Generator) -> SampleSet:
    """Draw one realization, consuming exactly k uniforms in region order."""
    u = rng.random(model.k)
    points = np.empty(model.k, dtype=np.int64)
    for i in range(model.k):
        points[i] = _invert(model.cums[i], model.cells[i], u[i])
    return SampleSet(points)


def sample_batch(model: IndependentModel, count: int, seed: int = 0) -> np.ndarray:
    """(count, k) array of realizations; row r comes from the (seed, r) stream."""
    if count < 0:
        raise InvalidArgumentError(f"count must be nonnegative, got {count}")
    k = model.k
    u = stream_uniforms(seed, count, k)
    out = np.empty((count, k), dtype=np.int64)
    for i in range(k):
        out[:, i] = _invert(model.cums[i], model.cells[i], u[:, i])
    return out


def sample_many(model: IndependentModel, count: int, seed: int = 0) -> list[SampleSet]:
    """count independent realizations, a deterministic function of (model, count, seed)."""
    return [SampleSet(row) for row in sample_batch(model, count, seed)]


@dataclass(frozen=True)
class ThroughputReport:
    """Wall-clock measurement of batch sampling speed."""

    realizations: int
    k: int
    seconds: float
    points_per_second: float
    seconds_per_point: float


def throughput_probe(
    model: IndependentModel, count: int, seed: int = 0, repeats: int = 3
) -> ThroughputReport:
    """Measure sampling throughput over `count` realizations (best of repeats)."""
    if count < 10_000:
        raise InvalidArgumentError("need at least 10^4 realizations to time reliably")
    best = np.inf
    for _ in range(max(1, repeats)):
        start = time.perf_counter()
        sample_batch(model, count, seed)
        best = min(best, time.perf_counter() - start)
    points = count * model.k
    return ThroughputReport(
        realizations=count,
        k=model.k,
        seconds=best,
        points_per_second=points / best,
        seconds_per_point=best / points,
    )

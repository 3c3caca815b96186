"""Domain partitioning by scaled orbital magnitude and mass balancing.

Cells are labeled by argmax_j alpha_j |v_j(x)|.  The scale factors alpha are
tuned by a damped multiplicative fixed-point iteration so that each region
carries total density close to one, after which the per-region densities are
renormalized into exact probability weights with a cumulative table for
binary-search inversion sampling.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property

import numpy as np

from .errors import DegenerateRegionError, InvalidArgumentError
from .rng import philox_stream

TIE_REL = 1e-14
GAUGE_TOL = 1e-12
MASS_SUM_TOL = 1e-8


@dataclass(frozen=True)
class Partition:
    """Disjoint cover of the grid into k regions with balancing metadata.

    alpha is normalized to geometric mean one (the labeling is invariant under
    common rescaling, so the gauge is fixed); masses[i] is the total density
    of region i under the labeling actually returned.
    """

    labels: np.ndarray
    alpha: np.ndarray
    masses: np.ndarray
    balance_iters: int
    converged: bool

    def __post_init__(self):
        labels = np.asarray(self.labels, dtype=np.int64)
        alpha = np.asarray(self.alpha, dtype=float)
        masses = np.asarray(self.masses, dtype=float)
        object.__setattr__(self, "labels", labels)
        object.__setattr__(self, "alpha", alpha)
        object.__setattr__(self, "masses", masses)
        k = alpha.shape[0] if alpha.ndim == 1 else 0
        if k < 1:
            raise InvalidArgumentError("alpha must be a nonempty 1D array")
        if masses.shape != (k,):
            raise InvalidArgumentError("masses must have one entry per region")
        if labels.ndim != 1 or labels.min() < 0 or labels.max() >= k:
            raise InvalidArgumentError("labels must be a 1D array with values in [0, k)")
        if np.any(alpha <= 0) or not np.all(np.isfinite(alpha)):
            raise InvalidArgumentError("alpha entries must be positive and finite")
        geomean = np.exp(np.mean(np.log(alpha)))
        if abs(geomean - 1.0) > GAUGE_TOL:
            raise InvalidArgumentError(
                f"alpha must have geometric mean 1, got {geomean!r}"
            )
        if abs(masses.sum() - k) > MASS_SUM_TOL:
            raise InvalidArgumentError(
                f"region masses sum to {masses.sum()!r}, expected k={k}"
            )

    @property
    def k(self) -> int:
        return self.alpha.shape[0]


@dataclass(frozen=True)
class BalanceParams:
    """Knobs for the balancing iteration."""

    eta: float = 0.5
    eps: float = 0.1
    max_iters: int = 200
    seed: int = 0

    def __post_init__(self):
        if not 0.0 < self.eta <= 1.0:
            raise InvalidArgumentError(f"eta must be in (0, 1], got {self.eta}")
        if self.eps <= 0:
            raise InvalidArgumentError(f"eps must be positive, got {self.eps}")
        if self.max_iters < 0:
            raise InvalidArgumentError("max_iters must be nonnegative")


def assign_labels(v: np.ndarray, alpha: np.ndarray, seed: int = 0) -> np.ndarray:
    """Label each cell by argmax_j alpha_j |v_j(x)|.

    Scores tied within 1e-14 relative of the row maximum are broken uniformly
    at random by a per-cell Philox stream keyed on (seed, flat index), so the
    labeling is a pure function of (v, alpha, seed) regardless of evaluation
    order or parallel scheduling.
    """
    v = np.asarray(v, dtype=float)
    alpha = np.asarray(alpha, dtype=float)
    if v.ndim != 2 or alpha.shape != (v.shape[1],):
        raise InvalidArgumentError("need v of shape (N, k) and alpha of shape (k,)")
    if np.any(alpha <= 0):
        raise InvalidArgumentError("alpha entries must be positive")

    scores = np.abs(v) * alpha
    labels = np.argmax(scores, axis=1).astype(np.int64)
    top = scores[np.arange(scores.shape[0]), labels]
    tied = scores >= top[:, None] * (1.0 - TIE_REL)
    for cell in np.flatnonzero(tied.sum(axis=1) > 1):
        candidates = np.flatnonzero(tied[cell])
        pick = philox_stream(seed, cell).integers(candidates.size)
        labels[cell] = candidates[pick]
    return labels


def region_masses(labels: np.ndarray, rho: np.ndarray, k: int | None = None) -> np.ndarray:
    """Total density per region: masses[i] = sum of rho over cells labeled i."""
    labels = np.asarray(labels, dtype=np.int64)
    rho = np.asarray(rho, dtype=float)
    if labels.shape != rho.shape:
        raise InvalidArgumentError("labels and rho must have the same length")
    if labels.min() < 0 or (k is not None and labels.max() >= k):
        raise InvalidArgumentError("labels out of range")
    return np.bincount(labels, weights=rho, minlength=k or 0)


def balance(
    v: np.ndarray, rho: np.ndarray, params: BalanceParams | None = None
) -> Partition:
    """Tune alpha so every region's density mass approaches one.

    Damped multiplicative update: relabel with the current alpha, measure the
    region masses m, set alpha_i *= m_i**(-eta) (doubling alpha_i when region
    i is empty), renormalize alpha to geometric mean one, and repeat until
    max|m_i - 1| <= eps or the iteration budget runs out.  The returned
    partition is the best iterate seen by max|m_i - 1|, so it is never worse
    than the unscaled alpha = 1 baseline; non-convergence is reported via the
    converged flag, not raised.
    """
    params = params or BalanceParams()
    v = np.asarray(v, dtype=float)
    rho = np.asarray(rho, dtype=float)
    k = v.shape[1]

    alpha = np.ones(k)
    best = None
    best_dev = np.inf
    converged = False
    iters = 0
    for iteration in range(params.max_iters + 1):
        iters = iteration
        labels = assign_labels(v, alpha, params.seed)
        masses = region_masses(labels, rho, k)
        deviation = np.max(np.abs(masses - 1.0))
        if deviation < best_dev:
            best_dev = deviation
            best = (labels, alpha.copy(), masses)
        if deviation <= params.eps:
            converged = True
            break
        if iteration == params.max_iters:
            break
        nonzero = masses > 0
        alpha[nonzero] *= masses[nonzero] ** (-params.eta)
        alpha[~nonzero] *= 2.0
        alpha /= np.exp(np.mean(np.log(alpha)))

    labels, alpha, masses = best
    return Partition(labels, alpha, masses, balance_iters=iters, converged=converged)


@dataclass(frozen=True)
class IndependentModel:
    """Per-region categorical tables for one-point-per-region sampling.

    Region weights are the density restricted to the region and renormalized
    to sum to one; cumulative tables are in ascending cell-index order with
    the last entry pinned to 1.0 so a strict-upper-bound binary search can
    never fall off the end and never lands on a zero-weight cell.
    """

    size: int
    cells: tuple
    weights: tuple
    cums: tuple
    alpha: np.ndarray
    grid_n: int | None = None

    @property
    def k(self) -> int:
        return len(self.cells)

    @cached_property
    def region_of(self) -> np.ndarray:
        """Region index per cell, -1 outside all supports."""
        out = np.full(self.size, -1, dtype=np.int64)
        for i, cells in enumerate(self.cells):
            out[cells] = i
        return out

    @cached_property
    def weight_of(self) -> np.ndarray:
        """Within-region sampling weight per cell, 0 outside all supports."""
        out = np.zeros(self.size)
        for cells, weights in zip(self.cells, self.weights):
            out[cells] = weights
        return out

    def marginal(self) -> np.ndarray:
        """P(cell appears in a realization); equals weight_of for a full cover."""
        return self.weight_of.copy()


def build_model(
    partition: Partition, rho: np.ndarray, grid_n: int | None = None
) -> IndependentModel:
    """Normalize the per-region density restrictions into sampling tables."""
    rho = np.asarray(rho, dtype=float)
    if rho.shape != partition.labels.shape:
        raise InvalidArgumentError("rho must have one entry per labeled cell")
    cells_all, weights_all, cums_all = [], [], []
    for region in range(partition.k):
        cells = np.flatnonzero(partition.labels == region)
        mass = rho[cells].sum() if cells.size else 0.0
        if cells.size == 0 or mass <= 0:
            raise DegenerateRegionError(region)
        weights = rho[cells] / mass
        weights /= weights.sum()
        cums = np.cumsum(weights)
        cums[-1] = 1.0
        cells_all.append(cells)
        weights_all.append(weights)
        cums_all.append(cums)
    return IndependentModel(
        size=rho.shape[0],
        cells=tuple(cells_all),
        weights=tuple(weights_all),
        cums=tuple(cums_all),
        alpha=partition.alpha.copy(),
        grid_n=grid_n,
    )

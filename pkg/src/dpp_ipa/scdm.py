"""Orbital localization by selected columns of the density matrix.

The k pivot cells sigma are chosen by greedy column-pivoted QR on Phi^T; the
localized basis is V = Phi C^T (C C^T)^{-1/2} with C = Phi(sigma, :), an
orthogonal remixing of the input orbitals that leaves the projection kernel
Phi Phi^T untouched.  The N-by-N kernel itself is never materialized.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import (
    IllConditionedError,
    InvalidArgumentError,
    RankDeficientError,
    UndefinedSpreadError,
)
from .model_problems import Grid, OrbitalSet

RANK_TOL = 1e-12
CONDITIONING_TOL = 1e-10
PIVOT_TIE_REL = 1e-12
ORTHONORMALITY_TOL = 1e-10


@dataclass(frozen=True)
class ScdmResult:
    """Pivot cells and the localized orthonormal basis they induce."""

    sigma: np.ndarray
    V: np.ndarray
    conditioning: float

    def __post_init__(self):
        sigma = np.asarray(self.sigma, dtype=np.int64)
        v = np.asarray(self.V, dtype=float)
        object.__setattr__(self, "sigma", sigma)
        object.__setattr__(self, "V", v)
        size, k = v.shape
        if sigma.shape != (k,):
            raise InvalidArgumentError("sigma must list one pivot per column of V")
        if len(np.unique(sigma)) != k or sigma.min() < 0 or sigma.max() >= size:
            raise InvalidArgumentError("pivots must be distinct indices in [0, N)")
        defect = np.max(np.abs(v.T @ v - np.eye(k)))
        if defect > ORTHONORMALITY_TOL:
            raise InvalidArgumentError(
                f"V columns are not orthonormal (defect {defect:.2e})"
            )

    @property
    def k(self) -> int:
        return self.V.shape[1]


def pivoted_qr_pivots(a: np.ndarray, rank_tol: float = RANK_TOL) -> np.ndarray:
    """First k pivots of a greedy column-pivoted Householder QR of a k-by-N matrix.

    Each step selects the remaining column with the largest residual norm
    (ties within 1e-12 relative go to the lowest original column index) and
    eliminates it from the rest with a Householder reflection.  Raises
    RankDeficientError when a selected residual norm falls below
    rank_tol * |R_11|.
    """
    a = np.asarray(a, dtype=float)
    if a.ndim != 2:
        raise InvalidArgumentError("expected a 2D matrix")
    k, size = a.shape
    if k > size:
        raise InvalidArgumentError(f"matrix must be wide: k={k} > N={size}")

    work = a.copy()
    perm = np.arange(size)
    first_norm = None
    for step in range(k):
        norms = np.linalg.norm(work[step:, step:], axis=0)
        top = norms.max()
        if first_norm is None:
            first_norm = top
        if top <= rank_tol * first_norm:
            raise RankDeficientError(
                f"residual norm {top:.3e} at pivot {step} is below "
                f"{rank_tol:.0e} of the leading norm {first_norm:.3e}"
            )
        tied = np.flatnonzero(norms >= top * (1.0 - PIVOT_TIE_REL))
        sel = step + tied[np.argmin(perm[step + tied])]

        work[:, [step, sel]] = work[:, [sel, step]]
        perm[[step, sel]] = perm[[sel, step]]

        x = work[step:, step]
        norm_x = np.linalg.norm(x)
        v = x.copy()
        v[0] += np.copysign(norm_x, x[0]) if x[0] != 0 else norm_x
        vtv = v @ v
        if vtv > 0:
            tail = work[step:, step + 1 :]
            tail -= np.outer((2.0 / vtv) * v, v @ tail)
        work[step, step] = -np.copysign(norm_x, x[0]) if x[0] != 0 else -norm_x
        work[step + 1 :, step] = 0.0

    return perm[:k].copy()


def inv_sqrt_spd(m: np.ndarray, tol: float = CONDITIONING_TOL) -> np.ndarray:
    """Inverse matrix square root of a symmetric positive definite matrix.

    Computed by symmetric eigendecomposition; an eigenvalue at or below tol
    raises IllConditionedError carrying the offending value.
    """
    m = np.asarray(m, dtype=float)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise InvalidArgumentError("expected a square matrix")
    scale = max(1.0, float(np.max(np.abs(m))))
    if np.max(np.abs(m - m.T)) > 1e-12 * scale:
        raise InvalidArgumentError("matrix is not symmetric")
    vals, vecs = np.linalg.eigh(0.5 * (m + m.T))
    smallest = float(vals[0])
    if smallest <= tol:
        raise IllConditionedError("matrix is not safely positive definite", smallest)
    x = (vecs / np.sqrt(vals)) @ vecs.T
    return 0.5 * (x + x.T)


def scdm_localize(orbitals: OrbitalSet) -> ScdmResult:
    """Localized orthonormal basis spanning the same projection as the input.

    sigma = pivots of Phi^T; V = Phi C^T (C C^T)^{-1/2} with C = Phi(sigma, :).
    The conditioning field records the smallest eigenvalue of the k-by-k pivot
    Gram matrix K(sigma, sigma) = C C^T.
    """
    phi = orbitals.phi
    sigma = pivoted_qr_pivots(phi.T)
    c = phi[sigma, :]
    gram = c @ c.T
    conditioning = float(np.linalg.eigvalsh(gram)[0])
    v = phi @ (c.T @ inv_sqrt_spd(gram))
    return ScdmResult(sigma, v, conditioning)


def column_spread(v: np.ndarray, grid: Grid) -> np.ndarray:
    """Mass-weighted RMS distance of each column from its centroid.

    Column weights are the squared entries, normalized.  On periodic grids the
    centroid is the per-dimension circular mean and distances wrap around; a
    dimension whose resultant vector is negligible (length below 1e-12, e.g.
    a perfectly uniform column) has no preferred circular mean and its
    centroid is pinned at coordinate 0.  An identically zero column has no
    defined spread and raises.
    """
    v = np.asarray(v, dtype=float)
    if v.ndim != 2 or v.shape[0] != grid.size:
        raise InvalidArgumentError("V must be (N, k) with N matching the grid")
    coords = grid.coordinates()
    spreads = np.empty(v.shape[1])
    for j in range(v.shape[1]):
        w = v[:, j] ** 2
        total = w.sum()
        if total <= 0:
            raise UndefinedSpreadError(f"column {j} is identically zero")
        w = w / total
        if grid.periodic:
            theta = 2.0 * np.pi * coords
            sin_sum = w @ np.sin(theta)
            cos_sum = w @ np.cos(theta)
            center = (np.arctan2(sin_sum, cos_sum) / (2.0 * np.pi)) % 1.0
            center[np.hypot(sin_sum, cos_sum) <= 1e-12] = 0.0
            delta = np.abs(coords - center)
            delta = np.minimum(delta, 1.0 - delta)
        else:
            delta = coords - w @ coords
        spreads[j] = np.sqrt(w @ np.sum(delta * delta, axis=1))
    return spreads

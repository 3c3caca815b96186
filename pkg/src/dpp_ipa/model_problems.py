"""Ground sets, discrete operators, and orbital sets for the 2D model problems.

An orbital set is a column-orthonormal matrix Phi whose columns span the range
of the rank-k projection kernel K = Phi Phi^T; its diagonal rho(x) is the
single-point inclusion density.  Orbital sets come from three constructors:
the analytic Fourier basis of the periodic grid Laplacian, the numerically
computed lowest eigenmodes of a discrete Schroedinger operator, and random
orthonormal matrices for synthetic test kernels.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np
import scipy.linalg
import scipy.sparse

from .errors import InvalidArgumentError, NumericalFailureError, ShellViolationError

BC_PERIODIC = "periodic"
BC_DIRICHLET = "dirichlet"
_BCS = (BC_PERIODIC, BC_DIRICHLET)

POT_NONE = "none"
POT_CORNER_WELL = "corner_well"
POT_CENTER_WELL = "center_well"
_POT_KINDS = (POT_NONE, POT_CORNER_WELL, POT_CENTER_WELL)

ORTHONORMALITY_TOL = 1e-10
DENSITY_SUM_TOL = 1e-8
DENSE_EIG_CAP = 4096  # largest ground-set size the dense eigensolver accepts


class NearDegeneracyWarning(UserWarning):
    """The gap above the highest kept eigenvalue is nearly zero."""


@dataclass(frozen=True)
class Grid:
    """Uniform n-by-n grid of cells indexing the ground set of size N = n*n.

    Periodic grids place cells at x = i*h, i = 0..n-1 with h = 1/n, covering
    the torus fundamental domain [0, 1)^2 (the corner x = 0 is a cell, where
    the model potentials attain their extremes).  Dirichlet grids use the
    interior points x = i*h, i = 1..n with h = 1/(n+1), strictly inside the
    unit square.  Flat index of cell (i1, i2) is i1*n + i2.
    """

    n: int
    bc: str

    def __post_init__(self):
        if not isinstance(self.n, (int, np.integer)) or isinstance(self.n, bool):
            raise InvalidArgumentError(f"grid size must be an integer, got {self.n!r}")
        if self.n < 2:
            raise InvalidArgumentError(f"grid needs n >= 2, got {self.n}")
        if self.bc not in _BCS:
            raise InvalidArgumentError(
                f"boundary condition must be one of {_BCS}, got {self.bc!r}"
            )

    @property
    def size(self) -> int:
        """Number of cells N = n^2."""
        return self.n * self.n

    @property
    def spacing(self) -> float:
        """Mesh width h."""
        return 1.0 / self.n if self.bc == BC_PERIODIC else 1.0 / (self.n + 1)

    @property
    def periodic(self) -> bool:
        return self.bc == BC_PERIODIC

    def flat_index(self, i1, i2):
        return np.asarray(i1) * self.n + np.asarray(i2)

    def cell_of(self, flat):
        return np.divmod(flat, self.n)

    def coordinates(self) -> np.ndarray:
        """(N, 2) array of cell coordinates in flat-index order."""
        offset = 0 if self.periodic else 1
        axis = (np.arange(self.n) + offset) * self.spacing
        x1, x2 = np.meshgrid(axis, axis, indexing="ij")
        return np.column_stack([x1.ravel(), x2.ravel()])


def build_grid(n: int, bc: str) -> Grid:
    """Validated grid constructor; n >= 2 and bc in {periodic, dirichlet}."""
    return Grid(n, bc)


@dataclass(frozen=True)
class PotentialSpec:
    """Separable cosine potential.

    corner_well evaluates U(x) = -amplitude * (cos 2 pi x1 + 1)(cos 2 pi x2 + 1),
    which is deepest at the domain corners; center_well flips the sign so the
    minimum (zero) sits at the domain center.
    """

    kind: str = POT_NONE
    amplitude: float = 512.0

    def __post_init__(self):
        if self.kind not in _POT_KINDS:
            raise InvalidArgumentError(
                f"potential kind must be one of {_POT_KINDS}, got {self.kind!r}"
            )
        if not np.isfinite(self.amplitude):
            raise InvalidArgumentError("potential amplitude must be finite")

    def evaluate(self, coords: np.ndarray) -> np.ndarray:
        coords = np.atleast_2d(np.asarray(coords, dtype=float))
        if self.kind == POT_NONE:
            return np.zeros(coords.shape[0])
        base = (np.cos(2 * np.pi * coords[:, 0]) + 1.0) * (
            np.cos(2 * np.pi * coords[:, 1]) + 1.0
        )
        sign = -1.0 if self.kind == POT_CORNER_WELL else 1.0
        return sign * self.amplitude * base


def assemble_operator(grid: Grid, pot: PotentialSpec | None = None) -> scipy.sparse.csr_matrix:
    """Five-point-stencil discretization of -Laplacian + U on the grid.

    Diagonal entries are 4/h^2 + U(cell center); each stencil neighbor
    contributes -1/h^2, wrapping around for periodic grids and truncating at
    the boundary for Dirichlet grids.  Returns a symmetric CSR matrix.
    """
    pot = pot or PotentialSpec()
    n, size = grid.n, grid.size
    inv_h2 = 1.0 / grid.spacing**2
    u = pot.evaluate(grid.coordinates())

    i1, i2 = np.divmod(np.arange(size), n)
    rows = [np.arange(size)]
    cols = [np.arange(size)]
    vals = [4.0 * inv_h2 + u]
    for d1, d2 in ((1, 0), (-1, 0), (0, 1), (0, -1)):
        j1, j2 = i1 + d1, i2 + d2
        if grid.periodic:
            # duplicate (row, col) pairs sum on conversion, which keeps row
            # sums zero for n = 2 where both lateral neighbors coincide
            neighbor = (j1 % n) * n + (j2 % n)
            keep = slice(None)
        else:
            inside = (j1 >= 0) & (j1 < n) & (j2 >= 0) & (j2 < n)
            neighbor = (j1 * n + j2)[inside]
            keep = inside
        rows.append(np.arange(size)[keep])
        cols.append(neighbor)
        vals.append(np.full(len(cols[-1]), -inv_h2))

    op = scipy.sparse.coo_matrix(
        (np.concatenate(vals), (np.concatenate(rows), np.concatenate(cols))),
        shape=(size, size),
    )
    return op.tocsr()


@dataclass(frozen=True)
class OrbitalSet:
    """Column-orthonormal orbital matrix defining a rank-k projection kernel.

    grid is None for synthetic kernels not attached to a 2D grid; eigenvalues
    and fermi_gap are populated only when the orbitals come from an operator
    spectrum.
    """

    grid: Grid | None
    k: int
    phi: np.ndarray
    eigenvalues: np.ndarray | None = None
    fermi_gap: float | None = None

    def __post_init__(self):
        phi = np.asarray(self.phi, dtype=float)
        object.__setattr__(self, "phi", phi)
        if phi.ndim != 2:
            raise InvalidArgumentError("phi must be a 2D (N, k) array")
        size, k = phi.shape
        if k != self.k:
            raise InvalidArgumentError(f"k={self.k} but phi has {k} columns")
        if not 1 <= k <= size:
            raise InvalidArgumentError(f"need 1 <= k <= N, got k={k}, N={size}")
        if self.grid is not None and self.grid.size != size:
            raise InvalidArgumentError(
                f"phi has {size} rows but grid has {self.grid.size} cells"
            )
        if self.eigenvalues is not None:
            ev = np.asarray(self.eigenvalues, dtype=float)
            object.__setattr__(self, "eigenvalues", ev)
            if ev.shape != (k,):
                raise InvalidArgumentError("eigenvalues must have length k")
            if np.any(np.diff(ev) < 0):
                raise InvalidArgumentError("eigenvalues must be nondecreasing")
        gram = phi.T @ phi
        defect = np.max(np.abs(gram - np.eye(k)))
        if defect > ORTHONORMALITY_TOL:
            raise InvalidArgumentError(
                f"columns are not orthonormal (defect {defect:.2e})"
            )
        total = float(np.sum(phi * phi))
        if abs(total - k) > DENSITY_SUM_TOL:
            raise InvalidArgumentError(
                f"density sums to {total!r}, expected k={k}"
            )

    @property
    def size(self) -> int:
        return self.phi.shape[0]


def density(orbitals: OrbitalSet) -> np.ndarray:
    """Pointwise density rho(x) = sum_i phi_i(x)^2; sums to k."""
    return np.sum(orbitals.phi * orbitals.phi, axis=1)


# --- Fourier basis of the periodic grid Laplacian ---------------------------
#
# Integer frequencies of the size-n DFT live in (-n/2, n/2].  A frequency pair
# {m, -m} yields a cos/sin pair of real eigenvectors; m with both components
# in {0, n/2} is its own negative and yields a single (+/-1-valued) cosine.
# Modes are grouped into shells by |m|^2; within a shell they are ordered by
# discrete stencil eigenvalue to keep the reported spectrum nondecreasing.


def _canonical_negation(m: int, n: int) -> int:
    neg = -m
    lo = -((n - 1) // 2)
    return neg + n if neg < lo else neg


def _stencil_symbol(m1: int, m2: int, n: int) -> float:
    s1 = np.sin(np.pi * m1 / n)
    s2 = np.sin(np.pi * m2 / n)
    return float(4.0 * n * n * (s1 * s1 + s2 * s2))


def _fourier_mode_classes(n: int) -> list[tuple[int, float, int, int, bool]]:
    """Canonical +/-m classes as (weight, symbol, m1, m2, self_paired)."""
    lo, hi = -((n - 1) // 2), n // 2
    classes = []
    seen = set()
    for m1 in range(lo, hi + 1):
        for m2 in range(lo, hi + 1):
            if (m1, m2) in seen:
                continue
            neg = (_canonical_negation(m1, n), _canonical_negation(m2, n))
            seen.add((m1, m2))
            seen.add(neg)
            rep = max((m1, m2), neg)
            weight = rep[0] * rep[0] + rep[1] * rep[1]
            symbol = _stencil_symbol(rep[0], rep[1], n)
            classes.append((weight, symbol, rep[0], rep[1], neg == (m1, m2)))
    classes.sort()
    return classes


def shell_closures(n: int, max_k: int | None = None) -> list[tuple[int, int]]:
    """(weight, cumulative mode count) after each complete frequency shell."""
    classes = _fourier_mode_classes(n)
    closures = []
    count = 0
    for idx, (weight, _, _, _, self_paired) in enumerate(classes):
        count += 1 if self_paired else 2
        last_in_shell = idx + 1 == len(classes) or classes[idx + 1][0] != weight
        if last_in_shell:
            closures.append((weight, count))
            if max_k is not None and count >= max_k:
                break
    return closures


def fourier_orbitals(grid: Grid, k: int) -> OrbitalSet:
    """Analytic real eigenbasis of the periodic grid Laplacian, k lowest modes.

    k must land exactly on a shell boundary of the |m|^2 grouping, otherwise
    the projection kernel would depend on an arbitrary choice inside a
    degenerate eigenspace; offending k raises ShellViolationError naming the
    two nearest closing counts.  The resulting density is constant k/N.
    """
    if not grid.periodic:
        raise InvalidArgumentError("fourier_orbitals requires a periodic grid")
    n, size = grid.n, grid.size
    if not isinstance(k, (int, np.integer)) or k < 1:
        raise InvalidArgumentError(f"k must be a positive integer, got {k!r}")
    if k > size:
        raise InvalidArgumentError(f"k={k} exceeds the ground-set size {size}")

    classes = _fourier_mode_classes(n)
    chosen = []
    count = 0
    for idx, cls in enumerate(classes):
        if count == k:
            break
        chosen.append(cls)
        count += 1 if cls[4] else 2
        boundary = idx + 1 == len(classes) or classes[idx + 1][0] != cls[0]
        if count >= k and not (count == k and boundary):
            closures = [c for _, c in shell_closures(n)]
            lower = max((c for c in closures if c < k), default=0)
            upper = min(c for c in closures if c > k) if k < size else size
            raise ShellViolationError(k, lower, upper)

    i1, i2 = np.divmod(np.arange(size), n)
    phi = np.empty((size, k))
    eigenvalues = np.empty(k)
    col = 0
    for _, symbol, m1, m2, self_paired in chosen:
        theta = (2.0 * np.pi / n) * (m1 * i1 + m2 * i2)
        if self_paired:
            phi[:, col] = np.cos(theta) / np.sqrt(size)
            eigenvalues[col] = symbol
            col += 1
        else:
            amp = np.sqrt(2.0 / size)
            phi[:, col] = amp * np.cos(theta)
            phi[:, col + 1] = amp * np.sin(theta)
            eigenvalues[col : col + 2] = symbol
            col += 2

    if np.any(np.diff(eigenvalues) < 0):
        # |m|^2 shell order and discrete stencil order disagree only when the
        # requested shells approach the aliasing boundary |m| ~ n/2
        raise InvalidArgumentError(
            f"shell ordering is not spectrally monotone for n={n}, k={k}; "
            "use a larger grid or fewer orbitals"
        )

    fermi_gap = None
    if count < size:
        fermi_gap = classes[len(chosen)][1] - eigenvalues[-1]
    return OrbitalSet(grid, k, phi, eigenvalues, fermi_gap)


def lowest_eigenmodes(
    operator, k: int, grid: Grid | None = None
) -> OrbitalSet:
    """k lowest eigenpairs of a symmetric operator, as an OrbitalSet.

    Uses a dense symmetric eigensolve (capped at N = 4096 unknowns); the sign
    of each eigenvector is fixed so its largest-magnitude entry (lowest index
    on ties) is positive, making repeated solves bitwise reproducible.  Warns
    when the spectral gap above mode k is nearly degenerate.
    """
    if scipy.sparse.issparse(operator):
        dense = operator.toarray()
    else:
        dense = np.asarray(operator, dtype=float)
    if dense.ndim != 2 or dense.shape[0] != dense.shape[1]:
        raise InvalidArgumentError("operator must be square")
    size = dense.shape[0]
    if size > DENSE_EIG_CAP:
        raise InvalidArgumentError(
            f"dense eigensolver is capped at N={DENSE_EIG_CAP}, got N={size}"
        )
    scale = np.max(np.abs(dense)) or 1.0
    if np.max(np.abs(dense - dense.T)) > 1e-10 * scale:
        raise InvalidArgumentError("operator must be symmetric")
    if not 1 <= k < size:
        raise InvalidArgumentError(f"need 1 <= k < N, got k={k}, N={size}")
    if grid is not None and grid.size != size:
        raise InvalidArgumentError("grid does not match operator dimension")

    try:
        vals, vecs = scipy.linalg.eigh(dense, subset_by_index=(0, k))
    except (np.linalg.LinAlgError, scipy.linalg.LinAlgError) as exc:
        raise NumericalFailureError(f"eigensolve failed: {exc}") from exc

    fermi_gap = float(vals[k] - vals[k - 1])
    if fermi_gap < 1e-6 * abs(vals[k]):
        warnings.warn(
            f"nearly degenerate level at k={k}: gap {fermi_gap:.3e}",
            NearDegeneracyWarning,
            stacklevel=2,
        )

    phi = vecs[:, :k].copy()
    for j in range(k):
        lead = np.argmax(np.abs(phi[:, j]))
        if phi[lead, j] < 0:
            phi[:, j] *= -1.0
    return OrbitalSet(grid, k, phi, vals[:k].copy(), fermi_gap)


def random_orthonormal_orbitals(size: int, k: int, seed: int = 0) -> OrbitalSet:
    """Synthetic orbital set: k orthonormal columns from a seeded Gaussian QR."""
    if not 1 <= k <= size:
        raise InvalidArgumentError(f"need 1 <= k <= N, got k={k}, N={size}")
    rng = np.random.default_rng(seed)
    q, r = np.linalg.qr(rng.standard_normal((size, k)))
    q = q * np.sign(np.where(np.diag(r) == 0, 1.0, np.diag(r)))
    return OrbitalSet(None, k, q)

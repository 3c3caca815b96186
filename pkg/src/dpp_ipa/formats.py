"""Binary and delimited artifact files.

All binary formats are little-endian and carry a 4-byte magic plus a u32
version for forward compatibility:

  DPPO  orbitals:   magic, version, u32 n, u8 bc (0 periodic, 1 dirichlet),
                    u32 k, k f64 eigenvalues, N*k f64 Phi (column-major)
  DPPV  localized:  magic, version, u32 n, u8 bc, u32 k, k u32 pivots,
                    N*k f64 V (column-major)
  DPPP  partition:  magic, version, u32 n, u32 k, k f64 alpha, N u32 labels,
                    k f64 masses, u8 converged

CSV companions are plain debug/plotting exports; sample CSVs hold one
realization per line (flat indices, or x/y coordinate pairs).
"""

from __future__ import annotations

import csv
import struct
from pathlib import Path

import numpy as np

from .errors import FileFormatError, InvalidArgumentError
from .model_problems import BC_DIRICHLET, BC_PERIODIC, Grid, OrbitalSet
from .partition import Partition
from .scdm import ScdmResult

FORMAT_VERSION = 1
_BC_CODE = {BC_PERIODIC: 0, BC_DIRICHLET: 1}
_BC_NAME = {code: name for name, code in _BC_CODE.items()}


def _read_exact(handle, count: int, what: str) -> bytes:
    data = handle.read(count)
    if len(data) != count:
        raise FileFormatError(f"truncated file while reading {what}")
    return data


def _check_magic(handle, magic: bytes, path) -> None:
    got = _read_exact(handle, 4, "magic")
    if got != magic:
        raise FileFormatError(f"{path}: expected magic {magic!r}, found {got!r}")
    (version,) = struct.unpack("<I", _read_exact(handle, 4, "version"))
    if version != FORMAT_VERSION:
        raise FileFormatError(f"{path}: unsupported version {version}")


def write_orbitals(path, orbitals: OrbitalSet) -> None:
    if orbitals.grid is None or orbitals.eigenvalues is None:
        raise InvalidArgumentError(
            "only grid-backed orbital sets with eigenvalues can be serialized"
        )
    grid, k = orbitals.grid, orbitals.k
    with open(path, "wb") as fh:
        fh.write(b"DPPO")
        fh.write(struct.pack("<IIBI", FORMAT_VERSION, grid.n, _BC_CODE[grid.bc], k))
        fh.write(orbitals.eigenvalues.astype("<f8").tobytes())
        fh.write(orbitals.phi.astype("<f8").tobytes(order="F"))


def load_orbitals(path) -> OrbitalSet:
    with open(path, "rb") as fh:
        _check_magic(fh, b"DPPO", path)
        n, bc_code, k = struct.unpack("<IBI", _read_exact(fh, 9, "header"))
        if bc_code not in _BC_NAME:
            raise FileFormatError(f"{path}: unknown boundary code {bc_code}")
        grid = Grid(int(n), _BC_NAME[bc_code])
        eigenvalues = np.frombuffer(
            _read_exact(fh, 8 * k, "eigenvalues"), dtype="<f8"
        ).copy()
        raw = _read_exact(fh, 8 * grid.size * k, "orbital entries")
        phi = np.frombuffer(raw, dtype="<f8").reshape((grid.size, k), order="F").copy()
    fermi_gap = None  # not serialized; recoverable only from the operator
    return OrbitalSet(grid, int(k), phi, eigenvalues, fermi_gap)


def write_scdm(path, result: ScdmResult, grid: Grid) -> None:
    if grid.size != result.V.shape[0]:
        raise InvalidArgumentError("grid does not match the localized basis")
    with open(path, "wb") as fh:
        fh.write(b"DPPV")
        fh.write(
            struct.pack("<IIBI", FORMAT_VERSION, grid.n, _BC_CODE[grid.bc], result.k)
        )
        fh.write(result.sigma.astype("<u4").tobytes())
        fh.write(result.V.astype("<f8").tobytes(order="F"))


def load_scdm(path) -> tuple[ScdmResult, Grid]:
    with open(path, "rb") as fh:
        _check_magic(fh, b"DPPV", path)
        n, bc_code, k = struct.unpack("<IBI", _read_exact(fh, 9, "header"))
        if bc_code not in _BC_NAME:
            raise FileFormatError(f"{path}: unknown boundary code {bc_code}")
        grid = Grid(int(n), _BC_NAME[bc_code])
        sigma = np.frombuffer(_read_exact(fh, 4 * k, "pivots"), dtype="<u4").astype(
            np.int64
        )
        raw = _read_exact(fh, 8 * grid.size * k, "basis entries")
        v = np.frombuffer(raw, dtype="<f8").reshape((grid.size, k), order="F").copy()
    gram = v[sigma, :] @ v[sigma, :].T
    conditioning = float(np.linalg.eigvalsh(gram)[0])
    return ScdmResult(sigma, v, conditioning), grid


def write_partition(path, partition: Partition, grid: Grid) -> None:
    if grid.size != partition.labels.shape[0]:
        raise InvalidArgumentError("grid does not match the partition labels")
    with open(path, "wb") as fh:
        fh.write(b"DPPP")
        fh.write(struct.pack("<III", FORMAT_VERSION, grid.n, partition.k))
        fh.write(partition.alpha.astype("<f8").tobytes())
        fh.write(partition.labels.astype("<u4").tobytes())
        fh.write(partition.masses.astype("<f8").tobytes())
        fh.write(struct.pack("<B", 1 if partition.converged else 0))


def load_partition(path) -> tuple[Partition, int]:
    """Read a partition file; balance_iters is not serialized and loads as 0."""
    with open(path, "rb") as fh:
        _check_magic(fh, b"DPPP", path)
        n, k = struct.unpack("<II", _read_exact(fh, 8, "header"))
        size = int(n) * int(n)
        alpha = np.frombuffer(_read_exact(fh, 8 * k, "alpha"), dtype="<f8").copy()
        labels = np.frombuffer(
            _read_exact(fh, 4 * size, "labels"), dtype="<u4"
        ).astype(np.int64)
        masses = np.frombuffer(_read_exact(fh, 8 * k, "masses"), dtype="<f8").copy()
        (converged,) = struct.unpack("<B", _read_exact(fh, 1, "converged flag"))
    partition = Partition(labels, alpha, masses, balance_iters=0, converged=bool(converged))
    return partition, int(n)


# --- delimited exports -------------------------------------------------------


def write_orbitals_csv(path, orbitals: OrbitalSet) -> None:
    """Debug export: header row n,bc,k then one row per cell with coordinates and phi."""
    if orbitals.grid is None:
        raise InvalidArgumentError("synthetic orbital sets have no grid to export")
    grid = orbitals.grid
    coords = grid.coordinates()
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow([grid.n, grid.bc, orbitals.k])
        for flat in range(grid.size):
            writer.writerow(
                [flat, f"{coords[flat, 0]:.17g}", f"{coords[flat, 1]:.17g}"]
                + [f"{v:.17g}" for v in orbitals.phi[flat]]
            )


def write_pivots_csv(path, sigma: np.ndarray, grid: Grid | None = None) -> None:
    coords = grid.coordinates() if grid is not None else None
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["rank", "flat_index", "x1", "x2"])
        for rank, flat in enumerate(np.asarray(sigma)):
            x1 = f"{coords[flat, 0]:.17g}" if coords is not None else ""
            x2 = f"{coords[flat, 1]:.17g}" if coords is not None else ""
            writer.writerow([rank, int(flat), x1, x2])


def write_labels_csv(path, labels: np.ndarray, grid: Grid) -> None:
    coords = grid.coordinates()
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["flat_index", "x1", "x2", "label"])
        for flat, label in enumerate(np.asarray(labels)):
            writer.writerow(
                [flat, f"{coords[flat, 0]:.17g}", f"{coords[flat, 1]:.17g}", int(label)]
            )


def write_samples_csv(path, batch: np.ndarray, grid: Grid | None = None, coords: bool = False) -> None:
    """One realization per line.

    Index format columns are region_0..region_{k-1} flat indices; coordinate
    format expands each point into x/y cell-center coordinates (requires a grid).
    """
    batch = np.asarray(batch)
    if batch.ndim != 2:
        raise InvalidArgumentError("batch must be a (count, k) index array")
    k = batch.shape[1]
    if coords and grid is None:
        raise InvalidArgumentError("coordinate output requires a grid")
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        if coords:
            table = grid.coordinates()
            header = []
            for i in range(k):
                header += [f"x_{i}", f"y_{i}"]
            writer.writerow(header)
            for row in batch:
                cells = table[row]
                writer.writerow([f"{val:.17g}" for val in cells.reshape(-1)])
        else:
            writer.writerow([f"region_{i}" for i in range(k)])
            for row in batch:
                writer.writerow([int(v) for v in row])


def read_samples_csv(path) -> np.ndarray:
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader)
        rows = [[int(v) for v in row] for row in reader]
    if any(not name.startswith("region_") for name in header):
        raise FileFormatError(f"{path}: not an index-format samples file")
    return np.array(rows, dtype=np.int64).reshape((len(rows), len(header)))


def format_report_value(value) -> str:
    if value is None:
        return "nan"
    if isinstance(value, float):
        return f"{value:.17g}"
    return str(value)


def write_report_text(path, report) -> None:
    """Flat key=value serialization of a comparison report."""
    with open(path, "w") as fh:
        for key, value in report.as_items():
            fh.write(f"{key}={format_report_value(value)}\n")


def write_report_csv(path, report) -> None:
    """Single CSV row (plus header) for sweep scripts."""
    items = report.as_items()
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow([key for key, _ in items])
        writer.writerow([format_report_value(value) for _, value in items])


def ensure_dir(path) -> Path:
    out = Path(path)
    out.mkdir(parents=True, exist_ok=True)
    return out

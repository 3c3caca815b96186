import struct

import numpy as np
import pytest

import dpp_ipa as d
from dpp_ipa import formats


@pytest.fixture
def small_orbitals():
    return d.fourier_orbitals(d.build_grid(4, "periodic"), 1)


def test_orbital_file_layout(tmp_path, small_orbitals):
    path = tmp_path / "o.dppo"
    formats.write_orbitals(path, small_orbitals)
    raw = path.read_bytes()
    assert raw[:4] == b"DPPO"
    version, n, bc, k = struct.unpack_from("<IIBI", raw, 4)
    assert (version, n, bc, k) == (1, 4, 0, 1)
    header = 4 + 13
    eigen = np.frombuffer(raw[header : header + 8], dtype="<f8")
    assert eigen[0] == small_orbitals.eigenvalues[0]
    assert len(raw) == header + 8 * 1 + 8 * 16 * 1


def test_orbital_roundtrip(tmp_path, small_orbitals):
    path = tmp_path / "o.dppo"
    formats.write_orbitals(path, small_orbitals)
    loaded = formats.load_orbitals(path)
    assert loaded.grid == small_orbitals.grid
    assert loaded.k == small_orbitals.k
    assert np.array_equal(loaded.phi, small_orbitals.phi)
    assert np.array_equal(loaded.eigenvalues, small_orbitals.eigenvalues)


def test_orbital_roundtrip_dirichlet_multicolumn(tmp_path):
    grid = d.build_grid(4, "dirichlet")
    orbitals = d.lowest_eigenmodes(d.assemble_operator(grid), 3, grid)
    path = tmp_path / "o.dppo"
    formats.write_orbitals(path, orbitals)
    loaded = formats.load_orbitals(path)
    assert loaded.grid.bc == "dirichlet"
    assert np.array_equal(loaded.phi, orbitals.phi)


def test_orbital_bad_magic(tmp_path, small_orbitals):
    path = tmp_path / "o.dppo"
    formats.write_orbitals(path, small_orbitals)
    data = bytearray(path.read_bytes())
    data[:4] = b"XXXX"
    path.write_bytes(bytes(data))
    with pytest.raises(d.FileFormatError):
        formats.load_orbitals(path)


def test_orbital_truncated(tmp_path, small_orbitals):
    path = tmp_path / "o.dppo"
    formats.write_orbitals(path, small_orbitals)
    path.write_bytes(path.read_bytes()[:-5])
    with pytest.raises(d.FileFormatError):
        formats.load_orbitals(path)


def test_synthetic_orbitals_not_serializable(tmp_path):
    synthetic = d.random_orthonormal_orbitals(8, 2, seed=0)
    with pytest.raises(d.InvalidArgumentError):
        formats.write_orbitals(tmp_path / "o.dppo", synthetic)


def test_scdm_roundtrip(tmp_path, uniform_32_13):
    result = d.scdm_localize(uniform_32_13)
    path = tmp_path / "v.dppv"
    formats.write_scdm(path, result, uniform_32_13.grid)
    raw = path.read_bytes()
    assert raw[:4] == b"DPPV"
    loaded, grid = formats.load_scdm(path)
    assert grid == uniform_32_13.grid
    assert np.array_equal(loaded.sigma, result.sigma)
    assert np.array_equal(loaded.V, result.V)
    assert loaded.conditioning == pytest.approx(result.conditioning, rel=1e-9)


def test_partition_file_layout_and_roundtrip(tmp_path):
    labels = np.array([0, 1, 1, 0])
    alpha = np.array([2.0, 0.5])
    masses = np.array([1.25, 0.75])
    part = d.Partition(labels, alpha, masses, balance_iters=3, converged=True)
    grid = d.build_grid(2, "periodic")
    path = tmp_path / "p.dppp"
    formats.write_partition(path, part, grid)

    raw = path.read_bytes()
    assert raw[:4] == b"DPPP"
    version, n, k = struct.unpack_from("<III", raw, 4)
    assert (version, n, k) == (1, 2, 2)
    assert len(raw) == 16 + 8 * 2 + 4 * 4 + 8 * 2 + 1
    assert raw[-1] == 1

    loaded, n_loaded = formats.load_partition(path)
    assert n_loaded == 2
    assert np.array_equal(loaded.labels, labels)
    assert np.array_equal(loaded.alpha, alpha)
    assert np.array_equal(loaded.masses, masses)
    assert loaded.converged


def test_orbitals_csv(tmp_path, small_orbitals):
    path = tmp_path / "o.csv"
    formats.write_orbitals_csv(path, small_orbitals)
    lines = path.read_text().strip().splitlines()
    assert lines[0] == "4,periodic,1"
    assert len(lines) == 1 + 16
    first = lines[1].split(",")
    assert first[0] == "0"
    assert float(first[3]) == pytest.approx(0.25)


def test_labels_and_pivots_csv(tmp_path):
    grid = d.build_grid(2, "periodic")
    formats.write_labels_csv(tmp_path / "l.csv", np.array([0, 1, 0, 1]), grid)
    lines = (tmp_path / "l.csv").read_text().strip().splitlines()
    assert lines[0] == "flat_index,x1,x2,label"
    assert len(lines) == 5

    formats.write_pivots_csv(tmp_path / "s.csv", np.array([3, 0]), grid)
    lines = (tmp_path / "s.csv").read_text().strip().splitlines()
    assert lines[0] == "rank,flat_index,x1,x2"
    assert lines[1].startswith("0,3,")


def test_samples_csv_roundtrip(tmp_path):
    batch = np.array([[0, 5, 2], [1, 4, 3]])
    path = tmp_path / "s.csv"
    formats.write_samples_csv(path, batch)
    assert np.array_equal(formats.read_samples_csv(path), batch)


def test_samples_csv_empty_has_header_only(tmp_path):
    path = tmp_path / "s.csv"
    formats.write_samples_csv(path, np.empty((0, 3), dtype=int))
    lines = path.read_text().strip().splitlines()
    assert lines == ["region_0,region_1,region_2"]


def test_samples_csv_coordinates(tmp_path):
    grid = d.build_grid(2, "periodic")
    path = tmp_path / "s.csv"
    formats.write_samples_csv(path, np.array([[0, 3]]), grid=grid, coords=True)
    lines = path.read_text().strip().splitlines()
    assert lines[0] == "x_0,y_0,x_1,y_1"
    values = [float(v) for v in lines[1].split(",")]
    assert values == [0.0, 0.0, 0.5, 0.5]


def test_report_serialization(tmp_path):
    report = d.ComparisonReport(
        marginal_l1=0.125,
        pair_error=1e-6,
        pair_count=100,
        tv_small=None,
        marginal_seconds=0.5,
        pair_seconds=0.25,
        tv_seconds=None,
    )
    formats.write_report_text(tmp_path / "r.txt", report)
    text = (tmp_path / "r.txt").read_text()
    assert "marginal_l1=0.125\n" in text
    assert "tv_small=nan\n" in text

    formats.write_report_csv(tmp_path / "r.csv", report)
    lines = (tmp_path / "r.csv").read_text().strip().splitlines()
    assert lines[0].startswith("marginal_l1,pair_error,pair_count,tv_small")
    assert lines[1].split(",")[0] == "0.125"

import hashlib

import numpy as np
import pytest

import dpp_ipa as d
from dpp_ipa import cli, formats

# first pinned run of `pipeline --example uniform --n 32 --k 13 --seed 7`
GOLDEN_PARTITION_SHA256 = "92ee1bdec84c9a3b4fd9f2fa86e7a5c1a6d24f00152e3ecb887c74aa967bff88"


def run(args):
    return cli.main([str(a) for a in args])


def test_model_uniform_writes_orbitals(tmp_path, capsys):
    assert run(["model", "--example", "uniform", "--n", "32", "--k", "13", "--out", tmp_path]) == 0
    out = capsys.readouterr().out
    assert "k=13" in out and "N=1024" in out
    orbitals = formats.load_orbitals(tmp_path / "orbitals.dppo")
    rho = d.density(orbitals)
    assert np.max(np.abs(rho - 13 / 1024)) <= 1e-12 * 13 / 1024


def test_model_paper_scale(tmp_path, capsys):
    assert run(["model", "--example", "uniform", "--out", tmp_path]) == 0
    assert "N=16384" in capsys.readouterr().out


def test_model_csv_flag(tmp_path):
    run(["model", "--example", "uniform", "--n", "8", "--k", "1", "--out", tmp_path, "--csv"])
    lines = (tmp_path / "orbitals.csv").read_text().strip().splitlines()
    assert lines[0] == "8,periodic,1"
    assert len(lines) == 65


def test_model_shell_violation_exit_code(tmp_path, capsys):
    code = run(["model", "--example", "uniform", "--n", "32", "--k", "12", "--out", tmp_path])
    assert code == 2
    err = capsys.readouterr().err
    assert "9" in err and "13" in err


def test_pipeline_golden_hash(tmp_path):
    assert (
        run(
            [
                "pipeline", "--example", "uniform", "--n", "32", "--k", "13",
                "--seed", "7", "--out", tmp_path,
            ]
        )
        == 0
    )
    digest = hashlib.sha256((tmp_path / "partition.dppp").read_bytes()).hexdigest()
    assert digest == GOLDEN_PARTITION_SHA256


def test_pipeline_single_region_covers_everything(tmp_path):
    assert (
        run(["pipeline", "--example", "uniform", "--n", "8", "--k", "1", "--out", tmp_path]) == 0
    )
    part, n = formats.load_partition(tmp_path / "partition.dppp")
    assert n == 8
    assert part.k == 1
    assert np.all(part.labels == 0)
    assert part.masses[0] == pytest.approx(1.0)


def test_pipeline_writes_summary_and_csvs(tmp_path):
    run(["pipeline", "--example", "uniform", "--n", "16", "--k", "5", "--out", tmp_path])
    summary = (tmp_path / "pipeline_summary.txt").read_text()
    assert "converged=" in summary and "max_mass_deviation=" in summary
    assert (tmp_path / "labels.csv").exists()
    assert (tmp_path / "pivots.csv").exists()


@pytest.fixture
def pipeline_dir(tmp_path):
    run(["pipeline", "--example", "uniform", "--n", "16", "--k", "9", "--seed", "1", "--out", tmp_path])
    return tmp_path


def test_sample_deterministic_for_fixed_seed(pipeline_dir):
    run(["sample", "--out", pipeline_dir, "--count", "20", "--seed", "5"])
    first = (pipeline_dir / "samples.csv").read_bytes()
    run(["sample", "--out", pipeline_dir, "--count", "20", "--seed", "5"])
    assert (pipeline_dir / "samples.csv").read_bytes() == first
    batch = formats.read_samples_csv(pipeline_dir / "samples.csv")
    assert batch.shape == (20, 9)


def test_sample_count_zero_header_only(pipeline_dir):
    run(["sample", "--out", pipeline_dir, "--count", "0"])
    lines = (pipeline_dir / "samples.csv").read_text().strip().splitlines()
    assert len(lines) == 1
    assert lines[0].startswith("region_0,")


def test_sample_coordinate_format(pipeline_dir):
    run(["sample", "--out", pipeline_dir, "--count", "3", "--format", "coords"])
    lines = (pipeline_dir / "samples.csv").read_text().strip().splitlines()
    assert lines[0].startswith("x_0,y_0,")
    assert len(lines) == 4


def test_sample_missing_inputs_is_io_error(tmp_path, capsys):
    assert run(["sample", "--out", tmp_path / "nowhere", "--count", "1"]) == 4
    assert "error:" in capsys.readouterr().err


def test_stats_on_custom_file(tmp_path):
    orbitals = d.fourier_orbitals(d.build_grid(4, "periodic"), 5)
    custom = tmp_path / "custom.dppo"
    formats.write_orbitals(custom, orbitals)
    out = tmp_path / "out"
    assert (
        run(["pipeline", "--example", "custom-file", "--orbitals", custom, "--out", out]) == 0
    )
    assert run(["stats", "--out", out]) == 0
    report = dict(
        line.split("=", 1) for line in (out / "report.txt").read_text().strip().splitlines()
    )
    assert float(report["marginal_l1"]) >= 0
    assert np.isfinite(float(report["tv_small"]))  # tiny instance: enumeration ran
    assert (out / "report.csv").exists()


def test_custom_file_requires_orbitals_flag(tmp_path, capsys):
    assert run(["pipeline", "--example", "custom-file", "--out", tmp_path]) == 2


def test_render_outputs_parse(pipeline_dir):
    from conftest import read_pgm, read_ppm

    assert run(["render", "--out", pipeline_dir, "--seed", "5"]) == 0
    density = read_pgm(pipeline_dir / "density.pgm")
    partition = read_ppm(pipeline_dir / "partition.ppm")
    realization = read_ppm(pipeline_dir / "realization.ppm")
    assert density.shape == (16, 16)
    assert partition.shape == (16, 16, 3)
    assert len(np.unique(partition.reshape(-1, 3), axis=0)) == 9
    # overlay adds black dots on top of the partition colors
    assert ((realization == 0).all(axis=2)).sum() > 0
    for name in ("density.png", "partition.png", "realization.png"):
        assert (pipeline_dir / name).read_bytes()[:8] == b"\x89PNG\r\n\x1a\n"


def test_thread_env_validation(tmp_path, capsys, monkeypatch):
    monkeypatch.setenv("DPP_IPA_THREADS", "zero")
    assert run(["model", "--example", "uniform", "--n", "8", "--k", "1", "--out", tmp_path]) == 2
    monkeypatch.setenv("DPP_IPA_THREADS", "2")
    assert run(["model", "--example", "uniform", "--n", "8", "--k", "1", "--out", tmp_path]) == 0


def test_run_config_defaults_match_stock_examples():
    assert cli.RunConfig(example="uniform").resolved()[:2] == (128, 61)
    assert cli.RunConfig(example="corner").resolved()[:2] == (64, 64)
    assert cli.RunConfig(example="center").resolved()[:2] == (64, 64)

"""Command-line driver.

Subcommands mirror the pipeline stages: `model` builds an orbital file,
`pipeline` localizes/partitions/balances it, `sample` draws realizations,
`stats` compares against the exact process, `render` writes figures, and
`demo` runs the three stock examples end to end with pinned seeds.

Exit codes: 0 success, 2 invalid arguments, 3 numerical failure, 4 I/O.
BLAS parallelism is capped at DPP_IPA_THREADS (default 1) so reruns of the
same command produce bitwise-identical artifacts.
"""

from __future__ import annotations

import argparse
import os
import sys
from dataclasses import dataclass, replace
from pathlib import Path

import numpy as np
from threadpoolctl import threadpool_limits

from . import formats, render
from .errors import (
    DegenerateRegionError,
    DppIpaError,
    FileFormatError,
    IllConditionedError,
    InvalidArgumentError,
    NumericalFailureError,
    RankDeficientError,
)
from .model_problems import (
    BC_DIRICHLET,
    BC_PERIODIC,
    OrbitalSet,
    PotentialSpec,
    assemble_operator,
    build_grid,
    density,
    fourier_orbitals,
    lowest_eigenmodes,
)
from .oracle import CompareParams, compare
from .partition import BalanceParams, balance, build_model
from .sampler import sample_batch
from .scdm import scdm_localize

EXIT_OK = 0
EXIT_INVALID = 2
EXIT_NUMERICAL = 3
EXIT_IO = 4

ORBITALS_FILE = "orbitals.dppo"
SCDM_FILE = "scdm.dppv"
PARTITION_FILE = "partition.dppp"
SUMMARY_FILE = "pipeline_summary.txt"
SAMPLES_FILE = "samples.csv"
REPORT_TEXT_FILE = "report.txt"
REPORT_CSV_FILE = "report.csv"

# (n, k, boundary, potential kind) reproducing the three stock experiments;
# the potential examples run at desk scale n=64 where the dense eigensolver
# is comfortable
EXAMPLE_DEFAULTS = {
    "uniform": (128, 61, BC_PERIODIC, "none"),
    "corner": (64, 64, BC_DIRICHLET, "corner_well"),
    "center": (64, 64, BC_DIRICHLET, "center_well"),
}
DEMO_SEEDS = (("uniform", 11), ("corner", 22), ("center", 33))
DEMO_SAMPLE_COUNT = 100


@dataclass(frozen=True)
class RunConfig:
    """Resolved settings for one pipeline run."""

    example: str = "uniform"
    n: int | None = None
    k: int | None = None
    amplitude: float = 512.0
    seed: int = 0
    eta: float = 0.5
    eps: float = 0.1
    max_iters: int = 200
    count: int = 100
    out: str = "dpp-ipa-out"
    sample_format: str = "index"
    orbitals_path: str | None = None

    def resolved(self) -> tuple[int, int, str, str]:
        if self.example not in EXAMPLE_DEFAULTS:
            raise InvalidArgumentError(f"unknown example {self.example!r}")
        n0, k0, bc, pot = EXAMPLE_DEFAULTS[self.example]
        return (self.n or n0, self.k or k0, bc, pot)


def _build_orbitals(cfg: RunConfig) -> OrbitalSet:
    if cfg.example == "custom-file":
        if not cfg.orbitals_path:
            raise InvalidArgumentError("--example custom-file requires --orbitals")
        return formats.load_orbitals(cfg.orbitals_path)
    n, k, bc, pot_kind = cfg.resolved()
    grid = build_grid(n, bc)
    if cfg.example == "uniform":
        return fourier_orbitals(grid, k)
    operator = assemble_operator(grid, PotentialSpec(pot_kind, cfg.amplitude))
    return lowest_eigenmodes(operator, k, grid)


def _load_stage_inputs(out: Path):
    orbitals = formats.load_orbitals(out / ORBITALS_FILE)
    partition, _ = formats.load_partition(out / PARTITION_FILE)
    if partition.labels.shape[0] != orbitals.size:
        raise FileFormatError("orbital and partition files disagree on the grid")
    rho = density(orbitals)
    model = build_model(partition, rho, grid_n=orbitals.grid.n)
    return orbitals, partition, rho, model


def cmd_model(cfg: RunConfig, csv: bool = False) -> int:
    orbitals = _build_orbitals(cfg)
    out = formats.ensure_dir(cfg.out)
    formats.write_orbitals(out / ORBITALS_FILE, orbitals)
    if csv:
        formats.write_orbitals_csv(out / "orbitals.csv", orbitals)
    gap = "n/a" if orbitals.fermi_gap is None else f"{orbitals.fermi_gap:.6g}"
    print(f"k={orbitals.k} N={orbitals.size} fermi_gap={gap}")
    return EXIT_OK


def cmd_pipeline(cfg: RunConfig) -> int:
    orbitals = _build_orbitals(cfg)
    out = formats.ensure_dir(cfg.out)
    formats.write_orbitals(out / ORBITALS_FILE, orbitals)

    localized = scdm_localize(orbitals)
    rho = density(orbitals)
    params = BalanceParams(eta=cfg.eta, eps=cfg.eps, max_iters=cfg.max_iters, seed=cfg.seed)
    part = balance(localized.V, rho, params)
    build_model(part, rho, grid_n=orbitals.grid.n)  # fails fast on empty regions

    grid = orbitals.grid
    formats.write_scdm(out / SCDM_FILE, localized, grid)
    formats.write_partition(out / PARTITION_FILE, part, grid)
    formats.write_pivots_csv(out / "pivots.csv", localized.sigma, grid)
    formats.write_labels_csv(out / "labels.csv", part.labels, grid)

    deviation = float(np.max(np.abs(part.masses - 1.0)))
    lines = [
        f"example={cfg.example}",
        f"n={grid.n}",
        f"k={orbitals.k}",
        f"seed={cfg.seed}",
        f"eta={cfg.eta:.17g}",
        f"eps={cfg.eps:.17g}",
        f"max_iters={cfg.max_iters}",
        f"balance_iters={part.balance_iters}",
        f"converged={part.converged}",
        f"max_mass_deviation={deviation:.17g}",
        f"conditioning={localized.conditioning:.17g}",
    ]
    lines += [f"mass_{i}={m:.17g}" for i, m in enumerate(part.masses)]
    (out / SUMMARY_FILE).write_text("\n".join(lines) + "\n")
    print(
        f"balance_iters={part.balance_iters} converged={part.converged} "
        f"max_mass_deviation={deviation:.6g}"
    )
    print("masses=" + " ".join(f"{m:.4f}" for m in part.masses))
    return EXIT_OK


def cmd_sample(cfg: RunConfig) -> int:
    out = Path(cfg.out)
    orbitals, _, _, model = _load_stage_inputs(out)
    batch = sample_batch(model, cfg.count, cfg.seed)
    formats.write_samples_csv(
        out / SAMPLES_FILE,
        batch,
        grid=orbitals.grid,
        coords=cfg.sample_format == "coords",
    )
    print(f"wrote {cfg.count} realizations of {model.k} points")
    return EXIT_OK


def cmd_stats(cfg: RunConfig) -> int:
    out = Path(cfg.out)
    orbitals, _, _, model = _load_stage_inputs(out)
    report = compare(orbitals, model, CompareParams(seed=cfg.seed))
    formats.write_report_text(out / REPORT_TEXT_FILE, report)
    formats.write_report_csv(out / REPORT_CSV_FILE, report)
    for key, value in report.as_items():
        print(f"{key}={formats.format_report_value(value)}")
    return EXIT_OK


def cmd_render(cfg: RunConfig) -> int:
    out = Path(cfg.out)
    orbitals, part, rho, model = _load_stage_inputs(out)
    grid = orbitals.grid
    palette = render.label_palette(part.k)

    render.write_pgm(out / "density.pgm", render.field_image(rho, grid))
    part_img = render.partition_image(part.labels, grid, palette)
    render.write_ppm(out / "partition.ppm", part_img)
    points = sample_batch(model, 1, cfg.seed)[0]
    render.write_ppm(out / "realization.ppm", render.stamp_points(part_img, points, grid))

    render.density_figure(rho, grid, out / "density.png")
    render.partition_figure(part.labels, grid, palette, out / "partition.png")
    render.partition_figure(
        part.labels, grid, palette, out / "realization.png",
        title="realization", points=points,
    )
    print("wrote density.pgm partition.ppm realization.ppm and PNG figures")
    return EXIT_OK


def _exit_code_for(exc: BaseException) -> int:
    if isinstance(exc, InvalidArgumentError):
        return EXIT_INVALID
    if isinstance(exc, FileFormatError):
        return EXIT_IO
    if isinstance(
        exc,
        (RankDeficientError, IllConditionedError, NumericalFailureError, DegenerateRegionError),
    ):
        return EXIT_NUMERICAL
    if isinstance(exc, OSError):
        return EXIT_IO
    return 1


def cmd_demo(out_root: str, count: int = DEMO_SAMPLE_COUNT) -> int:
    failures = []
    for name, seed in DEMO_SEEDS:
        cfg = RunConfig(example=name, seed=seed, count=count, out=str(Path(out_root) / name))
        print(f"--- {name} (seed {seed}) ---")
        try:
            cmd_pipeline(cfg)
            cmd_sample(cfg)
            cmd_render(cfg)
        except (DppIpaError, OSError) as exc:
            print(f"demo example {name!r} failed: {exc}", file=sys.stderr)
            failures.append(_exit_code_for(exc))
    return failures[0] if failures else EXIT_OK


def _add_model_flags(sub: argparse.ArgumentParser) -> None:
    sub.add_argument(
        "--example",
        default="uniform",
        choices=[*EXAMPLE_DEFAULTS, "custom-file"],
        help="stock experiment or a user-supplied orbital file",
    )
    sub.add_argument("--orbitals", default=None, help="DPPO path for --example custom-file")
    sub.add_argument("--n", type=int, default=None, help="cells per dimension")
    sub.add_argument("--k", type=int, default=None, help="number of orbitals")
    sub.add_argument("--amplitude", type=float, default=512.0, help="potential amplitude")


def _add_out_flag(sub: argparse.ArgumentParser) -> None:
    sub.add_argument("--out", default="dpp-ipa-out", help="artifact directory")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="dpp-ipa",
        description="independent-particle approximation to projection point processes",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("model", help="build and save the orbital set")
    _add_model_flags(p)
    _add_out_flag(p)
    p.add_argument("--csv", action="store_true", help="also write the debug CSV export")
    p.set_defaults(handler=lambda a: cmd_model(_config(a), csv=a.csv))

    p = sub.add_parser("pipeline", help="localize, partition, and balance")
    _add_model_flags(p)
    _add_out_flag(p)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--eta", type=float, default=0.5, help="balance damping")
    p.add_argument("--eps", type=float, default=0.1, help="balance mass tolerance")
    p.add_argument("--max-iters", type=int, default=200)
    p.set_defaults(handler=lambda a: cmd_pipeline(_config(a)))

    p = sub.add_parser("sample", help="draw realizations from pipeline output")
    _add_out_flag(p)
    p.add_argument("--count", type=int, default=100)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--format", choices=["index", "coords"], default="index")
    p.set_defaults(handler=lambda a: cmd_sample(_config(a)))

    p = sub.add_parser("stats", help="compare against the exact process")
    _add_out_flag(p)
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(handler=lambda a: cmd_stats(_config(a)))

    p = sub.add_parser("render", help="write figure files from pipeline output")
    _add_out_flag(p)
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(handler=lambda a: cmd_render(_config(a)))

    p = sub.add_parser("demo", help="full figure set for the three stock examples")
    p.add_argument("--out", default="dpp-ipa-demo", help="demo output root")
    p.add_argument("--count", type=int, default=DEMO_SAMPLE_COUNT)
    p.set_defaults(handler=lambda a: cmd_demo(a.out, a.count))

    return parser


def _config(args: argparse.Namespace) -> RunConfig:
    cfg = RunConfig()
    fields = {
        "example": "example",
        "n": "n",
        "k": "k",
        "amplitude": "amplitude",
        "seed": "seed",
        "eta": "eta",
        "eps": "eps",
        "max_iters": "max_iters",
        "count": "count",
        "out": "out",
        "format": "sample_format",
        "orbitals": "orbitals_path",
    }
    updates = {
        attr: getattr(args, flag)
        for flag, attr in fields.items()
        if hasattr(args, flag) and getattr(args, flag) is not None
    }
    return replace(cfg, **updates)


def _thread_limit() -> int:
    raw = os.environ.get("DPP_IPA_THREADS")
    if raw is None or raw == "":
        return 1
    try:
        value = int(raw)
    except ValueError:
        raise InvalidArgumentError(f"DPP_IPA_THREADS must be an integer, got {raw!r}")
    if value < 1:
        raise InvalidArgumentError(f"DPP_IPA_THREADS must be >= 1, got {value}")
    return value


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        with threadpool_limits(limits=_thread_limit()):
            return args.handler(args)
    except (DppIpaError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return _exit_code_for(exc)


if __name__ == "__main__":
    sys.exit(main())
